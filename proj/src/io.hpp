#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sensing.hpp"
#include "solvers.hpp"
#include "tensor.hpp"
#include "tt.hpp"

namespace ttr {

// DTF v1: text header "DTF1 N d1 ... dN\n", then prod(d_i) little-endian
// IEEE-754 doubles in vectorization order.
void write_dtf(const std::string& path, const DenseTensor& x);
DenseTensor read_dtf(const std::string& path);

// TTF v1: text header "TTF1 N r0 d1 r1 ... dN rN\n", then the factors in
// order, each left unfolding stored row-major, doubles.
void write_ttf(const std::string& path, const TTTensor& tt);
TTTensor read_ttf(const std::string& path);

// Raw little-endian doubles, no header.
void write_doubles(const std::string& path, const Eigen::VectorXd& v);
Eigen::VectorXd read_doubles(const std::string& path);

// Trace CSV: header "t,objective,rel_error,mu_t,factor_dist2"; NaN fields
// are written empty.
void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_trace_csv(const std::string& path);

/// PRB v1 problem bundle. File references are relative to the bundle's
/// directory.
struct ProblemBundle {
  std::vector<Index> dims;
  std::vector<Index> ranks;
  Index m = 0;
  std::uint64_t master_seed = 0;
  double p_s = 0.0;
  double outlier_sigma2 = 10.0;
  std::uint64_t support_seed = 0;
  std::uint64_t value_seed = 0;
  std::string xstar_file;
  std::string y_file;
  std::string storage = "auto";  // auto | materialized | streamed
};

void write_bundle(const std::string& path, const ProblemBundle& bundle);
ProblemBundle read_bundle(const std::string& path);

Storage parse_storage(const std::string& name);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ttr
