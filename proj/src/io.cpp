#include "io.hpp"

#include "errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ttr {

namespace {

// Numeric payloads are raw IEEE-754 doubles; this code assumes a
// little-endian host, which covers every supported target.
static_assert(sizeof(double) == 8, "doubles must be 64-bit");

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw IOError("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw IOError("cannot open for reading: " + path);
  return f;
}

void write_raw(std::ofstream& f, const double* data, std::size_t count) {
  f.write(reinterpret_cast<const char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!f) throw IOError("short write of numeric payload");
}

void read_raw(std::ifstream& f, double* data, std::size_t count) {
  f.read(reinterpret_cast<char*>(data),
         static_cast<std::streamsize>(count * sizeof(double)));
  if (f.gcount() != static_cast<std::streamsize>(count * sizeof(double)))
    throw IOError("short read of numeric payload");
}

std::string csv_field(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_field(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

}  // namespace

void write_dtf(const std::string& path, const DenseTensor& x) {
  auto f = open_out(path, true);
  f << "DTF1 " << x.order();
  for (Index d : x.dims()) f << ' ' << d;
  f << '\n';
  write_raw(f, x.vec().data(), static_cast<std::size_t>(x.size()));
}

DenseTensor read_dtf(const std::string& path) {
  auto f = open_in(path, true);
  std::string line;
  std::getline(f, line);
  std::istringstream header(line);
  std::string magic;
  Index n = 0;
  header >> magic >> n;
  if (magic != "DTF1" || n <= 0)
    throw IOError("not a DTF v1 file: " + path);
  std::vector<Index> dims(n);
  for (Index i = 0; i < n; ++i)
    if (!(header >> dims[i]))
      throw IOError("truncated DTF header: " + path);
  DenseTensor x(dims);
  read_raw(f, x.vec().data(), static_cast<std::size_t>(x.size()));
  return x;
}

void write_ttf(const std::string& path, const TTTensor& tt) {
  auto f = open_out(path, true);
  const Index n = tt.order();
  f << "TTF1 " << n << " 1";
  for (Index i = 0; i < n; ++i)
    f << ' ' << tt.dims()[i] << ' ' << tt.rank_after(i);
  f << '\n';
  std::vector<double> buf;
  for (Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd& l = tt.factor(i);
    buf.resize(static_cast<std::size_t>(l.size()));
    std::size_t pos = 0;
    for (Index r = 0; r < l.rows(); ++r)
      for (Index c = 0; c < l.cols(); ++c) buf[pos++] = l(r, c);
    write_raw(f, buf.data(), buf.size());
  }
}

TTTensor read_ttf(const std::string& path) {
  auto f = open_in(path, true);
  std::string line;
  std::getline(f, line);
  std::istringstream header(line);
  std::string magic;
  Index n = 0;
  header >> magic >> n;
  if (magic != "TTF1" || n <= 0)
    throw IOError("not a TTF v1 file: " + path);
  Index r0 = 0;
  header >> r0;
  if (r0 != 1) throw IOError("TTF leading rank must be 1");
  std::vector<Index> dims(n), bounds(n);
  for (Index i = 0; i < n; ++i)
    if (!(header >> dims[i] >> bounds[i]))
      throw IOError("truncated TTF header: " + path);
  if (bounds[n - 1] != 1)
    throw IOError("TTF trailing rank must be 1");
  std::vector<Index> ranks(bounds.begin(), bounds.end() - 1);

  std::vector<Eigen::MatrixXd> factors(n);
  Index r_prev = 1;
  std::vector<double> buf;
  for (Index i = 0; i < n; ++i) {
    const Index rows = r_prev * dims[i];
    const Index cols = bounds[i];
    buf.resize(static_cast<std::size_t>(rows * cols));
    read_raw(f, buf.data(), buf.size());
    Eigen::MatrixXd l(rows, cols);
    std::size_t pos = 0;
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) l(r, c) = buf[pos++];
    factors[i] = std::move(l);
    r_prev = cols;
  }
  return TTTensor(dims, ranks, std::move(factors));
}

void write_doubles(const std::string& path, const Eigen::VectorXd& v) {
  auto f = open_out(path, true);
  write_raw(f, v.data(), static_cast<std::size_t>(v.size()));
}

Eigen::VectorXd read_doubles(const std::string& path) {
  auto f = open_in(path, true);
  f.seekg(0, std::ios::end);
  const std::streamsize bytes = f.tellg();
  f.seekg(0, std::ios::beg);
  if (bytes % 8 != 0)
    throw IOError("payload is not a whole number of doubles");
  Eigen::VectorXd v(bytes / 8);
  if (v.size() > 0) read_raw(f, v.data(), static_cast<std::size_t>(v.size()));
  return v;
}

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace) {
  auto f = open_out(path, false);
  f << "t,objective,rel_error,mu_t,factor_dist2\r\n";
  for (const TraceRecord& r : trace) {
    f << r.t << ',' << csv_field(r.objective) << ',' << csv_field(r.rel_error)
      << ',' << csv_field(r.mu) << ',' << csv_field(r.factor_dist2) << "\r\n";
  }
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  auto f = open_in(path, false);
  std::string line;
  if (!std::getline(f, line))
    throw IOError("empty trace file: " + path);
  std::vector<TraceRecord> out;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    TraceRecord r;
    std::getline(row, field, ',');
    r.t = std::stoll(field);
    std::getline(row, field, ',');
    r.objective = parse_field(field);
    std::getline(row, field, ',');
    r.rel_error = parse_field(field);
    std::getline(row, field, ',');
    r.mu = parse_field(field);
    std::getline(row, field, ',');
    r.factor_dist2 = parse_field(field);
    out.push_back(r);
  }
  return out;
}

void write_bundle(const std::string& path, const ProblemBundle& bundle) {
  nlohmann::json j;
  j["format"] = "PRB1";
  j["dims"] = bundle.dims;
  j["ranks"] = bundle.ranks;
  j["m"] = bundle.m;
  j["master_seed"] = bundle.master_seed;
  j["p_s"] = bundle.p_s;
  j["outlier_sigma2"] = bundle.outlier_sigma2;
  j["support_seed"] = bundle.support_seed;
  j["value_seed"] = bundle.value_seed;
  j["xstar_file"] = bundle.xstar_file;
  j["y_file"] = bundle.y_file;
  j["storage"] = bundle.storage;
  write_text_file(path, j.dump(2) + "\n");
}

ProblemBundle read_bundle(const std::string& path) {
  const nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  if (j.value("format", "") != "PRB1")
    throw IOError("not a PRB v1 bundle: " + path);
  ProblemBundle b;
  b.dims = j.at("dims").get<std::vector<Index>>();
  b.ranks = j.at("ranks").get<std::vector<Index>>();
  b.m = j.at("m").get<Index>();
  b.master_seed = j.at("master_seed").get<std::uint64_t>();
  b.p_s = j.at("p_s").get<double>();
  b.outlier_sigma2 = j.at("outlier_sigma2").get<double>();
  b.support_seed = j.at("support_seed").get<std::uint64_t>();
  b.value_seed = j.at("value_seed").get<std::uint64_t>();
  b.xstar_file = j.at("xstar_file").get<std::string>();
  b.y_file = j.at("y_file").get<std::string>();
  b.storage = j.value("storage", "auto");
  return b;
}

Storage parse_storage(const std::string& name) {
  if (name == "auto") return Storage::Auto;
  if (name == "materialized") return Storage::Materialized;
  if (name == "streamed") return Storage::Streamed;
  throw ConfigError("unknown storage mode: " + name);
}

std::string read_text_file(const std::string& path) {
  auto f = open_in(path, true);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  auto f = open_out(path, true);
  f << content;
  if (!f) throw IOError("short write: " + path);
}

}  // namespace ttr
