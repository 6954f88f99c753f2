#include <array>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "eblab/bench.hpp"
#include "eblab/config.hpp"

namespace eb {

namespace {

constexpr char kMagic[4] = {'E', 'B', 'D', 'S'};
constexpr std::uint8_t kVersion = 1;

void io_fail(const std::filesystem::path& path, const char* what) {
  throw std::runtime_error(std::string(what) + ": " + path.string());
}

template <class T>
void put_le(std::ostream& out, T v) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::uint64_t u;
  static_assert(sizeof(T) <= 8);
  std::memcpy(&u, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <class T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  std::uint64_t u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    u |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  T v;
  std::memcpy(&v, &u, sizeof(T));
  return v;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open dataset file for writing");
  out.write(kMagic, 4);
  out.put(static_cast<char>(kVersion));
  put_le<std::uint64_t>(out, ds.root_seed);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.n));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.batches.size()));
  const std::string pop = pop_to_json(ds.pop).dump();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(pop.size()));
  out.write(pop.data(), pop.size());
  for (const auto& b : ds.batches) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(b.theta.size()));
    for (double t : b.theta) put_le<double>(out, t);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(b.x.size()));
    for (int x : b.x) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(x));
  }
  if (!out) io_fail(path, "write error on dataset file");
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open dataset file");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    io_fail(path, "not an EBDS dataset file");
  const int version = in.get();
  if (version != kVersion) io_fail(path, "unsupported EBDS version");
  Dataset ds;
  ds.root_seed = get_le<std::uint64_t>(in);
  ds.n = static_cast<int>(get_le<std::uint32_t>(in));
  const auto m = get_le<std::uint32_t>(in);
  const auto pop_len = get_le<std::uint32_t>(in);
  std::string pop(pop_len, '\0');
  in.read(pop.data(), pop_len);
  ds.pop = pop_from_json(nlohmann::json::parse(pop));
  ds.batches.resize(m);
  for (auto& b : ds.batches) {
    b.theta.resize(get_le<std::uint32_t>(in));
    for (double& t : b.theta) t = get_le<double>(in);
    b.x.resize(get_le<std::uint32_t>(in));
    for (int& x : b.x) x = static_cast<int>(get_le<std::uint32_t>(in));
  }
  if (!in) io_fail(path, "truncated dataset file");
  return ds;
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open csv for writing");
  out << "batch,index,theta,x\n";
  for (std::size_t m = 0; m < ds.batches.size(); ++m)
    for (std::size_t i = 0; i < ds.batches[m].theta.size(); ++i)
      out << m << ',' << i << ',' << format_real(ds.batches[m].theta[i]) << ','
          << ds.batches[m].x[i] << '\n';
  if (!out) io_fail(path, "write error on csv");
}

void write_report(const std::vector<RegretReport>& reports,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open report for writing");
  out << "estimator,n,n_test,reps,mean_regret,stderr,config_hash\n";
  for (const auto& r : reports)
    out << r.estimator_name << ',' << r.n << ',' << r.n_test << ',' << r.reps
        << ',' << format_real(r.mean_regret) << ',' << format_real(r.std_error)
        << ',' << r.config_hash << '\n';
  if (!out) io_fail(path, "write error on report");
}

std::vector<RegretReport> read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open report");
  std::string line;
  if (!std::getline(in, line) ||
      line != "estimator,n,n_test,reps,mean_regret,stderr,config_hash")
    io_fail(path, "bad report header");
  std::vector<RegretReport> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    RegretReport r;
    std::string field;
    std::getline(row, r.estimator_name, ',');
    std::getline(row, field, ',');
    r.n = std::stoi(field);
    std::getline(row, field, ',');
    r.n_test = std::stoi(field);
    std::getline(row, field, ',');
    r.reps = std::stoi(field);
    std::getline(row, field, ',');
    r.mean_regret = std::stod(field);
    std::getline(row, field, ',');
    r.std_error = std::stod(field);
    std::getline(row, r.config_hash, ',');
    out.push_back(std::move(r));
  }
  return out;
}

void write_alpha_csv(const std::vector<std::pair<int, AlphaFitResult>>& per_n_test,
                     int n, int reps, const std::string& config_hash,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open alpha csv for writing");
  out << "alpha,msd,n,n_test,reps,config_hash\n";
  for (const auto& [n_test, result] : per_n_test)
    for (const auto& [alpha, msd] : result.curve)
      out << format_real(alpha) << ',' << format_real(msd) << ',' << n << ','
          << n_test << ',' << reps << ',' << config_hash << '\n';
  if (!out) io_fail(path, "write error on alpha csv");
}

void write_contraction_csv(const std::vector<ContractionRow>& rows,
                           const std::string& config_hash,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open contraction csv for writing");
  out << "n,median_h2,q90_h2,reps,config_hash\n";
  for (const auto& r : rows)
    out << r.n << ',' << format_real(r.median_h2) << ',' << format_real(r.q90_h2)
        << ',' << r.reps << ',' << config_hash << '\n';
  if (!out) io_fail(path, "write error on contraction csv");
}

}  // namespace eb
