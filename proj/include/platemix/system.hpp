#pragma once

// Assembled symmetric block systems: unknown layout, sparse matrix, right
// hand side, and MatrixMarket exchange (symmetric coordinate, 1-based).

#include <Eigen/Sparse>

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "platemix/forms.hpp"

namespace platemix {

struct BlockSystem {
  struct Block {
    std::string name;
    int offset = 0;
    int size = 0;
  };

  std::vector<Block> blocks;
  SparseMat A;
  Eigen::VectorXd rhs;
  bool symmetric = true;

  int size() const { return static_cast<int>(A.rows()); }

  const Block& block(const std::string& name) const {
    for (const auto& b : blocks)
      if (b.name == name) return b;
    throw std::invalid_argument("no block named " + name);
  }
  bool has_block(const std::string& name) const {
    for (const auto& b : blocks)
      if (b.name == name) return true;
    return false;
  }
  Eigen::VectorXd extract(const std::string& name, const Eigen::VectorXd& x) const {
    const Block& b = block(name);
    return x.segment(b.offset, b.size);
  }
};

// Helper accumulating named blocks and symmetric couplings into triplets.
class BlockSystemBuilder {
 public:
  int add_block(const std::string& name, int size) {
    int off = n_;
    sys_.blocks.push_back({name, off, size});
    n_ += size;
    return off;
  }

  int offset(const std::string& name) const { return sys_.block(name).offset; }

  // Inserts M into (row_block, col_block); when mirror is set the transpose
  // goes into (col_block, row_block) as well.
  void add_coupling(const std::string& row_block, const std::string& col_block,
                    const SparseMat& M, double scale = 1.0, bool mirror = true) {
    int ro = offset(row_block), co = offset(col_block);
    for (int k = 0; k < M.outerSize(); ++k)
      for (SparseMat::InnerIterator it(M, k); it; ++it) {
        trips_.emplace_back(ro + it.row(), co + it.col(), scale * it.value());
        if (mirror) trips_.emplace_back(co + it.col(), ro + it.row(), scale * it.value());
      }
  }

  void add_diagonal_block(const std::string& name, const SparseMat& M, double scale = 1.0) {
    add_coupling(name, name, M, scale, /*mirror=*/false);
  }

  void add_entry(int row, int col, double v) { trips_.emplace_back(row, col, v); }

  void set_rhs(const std::string& name, const Eigen::VectorXd& b) {
    rhs_parts_.emplace_back(offset(name), b);
  }

  BlockSystem finish() {
    sys_.A.resize(n_, n_);
    sys_.A.setFromTriplets(trips_.begin(), trips_.end());
    sys_.rhs = Eigen::VectorXd::Zero(n_);
    for (const auto& [off, b] : rhs_parts_) sys_.rhs.segment(off, b.size()) = b;
    return std::move(sys_);
  }

 private:
  BlockSystem sys_;
  std::vector<Triplet> trips_;
  std::vector<std::pair<int, Eigen::VectorXd>> rhs_parts_;
  int n_ = 0;
};

inline double max_asymmetry(const SparseMat& A) {
  SparseMat D = SparseMat(A.transpose()) - A;
  double m = 0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (SparseMat::InnerIterator it(D, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

// ---- MatrixMarket -------------------------------------------------------------

inline void write_matrix_market(const SparseMat& A, const std::string& path,
                                bool symmetric = true) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "%%MatrixMarket matrix coordinate real "
      << (symmetric ? "symmetric" : "general") << "\n";
  std::vector<Triplet> entries;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMat::InnerIterator it(A, k); it; ++it) {
      if (symmetric && it.row() < it.col()) continue;  // keep lower triangle
      entries.emplace_back(it.row(), it.col(), it.value());
    }
  out << A.rows() << " " << A.cols() << " " << entries.size() << "\n";
  out.precision(17);
  for (const auto& e : entries)
    out << e.row() + 1 << " " << e.col() + 1 << " " << e.value() << "\n";
}

inline SparseMat read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw std::runtime_error("not a MatrixMarket file: " + path);
  bool symmetric = line.find("symmetric") != std::string::npos;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '%') break;
  std::istringstream hdr(line);
  int rows, cols;
  long nnz;
  hdr >> rows >> cols >> nnz;
  if (!hdr) throw std::runtime_error("bad MatrixMarket header in " + path);
  std::vector<Triplet> trips;
  trips.reserve(symmetric ? 2 * nnz : nnz);
  for (long k = 0; k < nnz; ++k) {
    int i, j;
    double v;
    in >> i >> j >> v;
    if (!in) throw std::runtime_error("truncated MatrixMarket file: " + path);
    trips.emplace_back(i - 1, j - 1, v);
    if (symmetric && i != j) trips.emplace_back(j - 1, i - 1, v);
  }
  SparseMat A(rows, cols);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

inline Eigen::VectorXd read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> vals;
  double v;
  while (in >> v) vals.push_back(v);
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<long>(vals.size()));
}

inline void write_vector(const Eigen::VectorXd& x, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(17);
  for (long i = 0; i < x.size(); ++i) out << x[i] << "\n";
}

}  // namespace platemix
