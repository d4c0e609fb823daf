#ifndef STARCP_LINSOLVE_HPP
#define STARCP_LINSOLVE_HPP

#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "starcp/hp.hpp"

namespace starcp {

struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sparse square system A x = b, rows stored as ordered maps. Solved by
// Gaussian elimination with minimum-degree diagonal pivoting, which keeps
// fill-in bounded on the banded generator systems that dominate this project.
// Generator matrices are (weakly) diagonally dominant M-matrices, so diagonal
// pivoting is numerically safe; a vanishing pivot signals a reducible chain.
template <typename T>
class SparseSystem {
 public:
  explicit SparseSystem(int n) : n_(n), rows_(n), rhs_(n) {}

  void add(int i, int j, const T& v) {
    if (v != 0) rows_[i][j] += v;
  }
  void set_rhs(int i, const T& v) { rhs_[i] = v; }
  T& rhs(int i) { return rhs_[i]; }

  // Solves in place; returns the solution vector.
  std::vector<T> solve() {
    std::vector<bool> eliminated(n_, false);
    std::vector<int> order;
    order.reserve(n_);
    // columns -> rows with nonzero entry, kept in sync during elimination
    std::vector<std::set<int>> col_rows(n_);
    for (int i = 0; i < n_; ++i)
      for (auto& [j, v] : rows_[i])
        if (v != 0) col_rows[j].insert(i);

    for (int step = 0; step < n_; ++step) {
      // minimum-degree pivot: smallest (row nonzeros)*(column nonzeros)
      int pivot = -1;
      long best = -1;
      for (int i = 0; i < n_; ++i) {
        if (eliminated[i]) continue;
        auto it = rows_[i].find(i);
        if (it == rows_[i].end() || it->second == 0) continue;
        long score = static_cast<long>(rows_[i].size()) *
                     static_cast<long>(col_rows[i].size());
        if (best < 0 || score < best) {
          best = score;
          pivot = i;
          if (score <= 4) break;
        }
      }
      if (pivot < 0) throw SingularSystem("no usable pivot (singular system)");

      eliminated[pivot] = true;
      order.push_back(pivot);
      const T piv = rows_[pivot][pivot];
      std::vector<int> targets(col_rows[pivot].begin(), col_rows[pivot].end());
      for (int i : targets) {
        if (i == pivot || eliminated[i]) continue;
        auto it = rows_[i].find(pivot);
        if (it == rows_[i].end() || it->second == 0) continue;
        T factor = it->second / piv;
        rows_[i].erase(it);
        col_rows[pivot].erase(i);
        for (const auto& [j, v] : rows_[pivot]) {
          if (j == pivot) continue;
          T& entry = rows_[i][j];
          entry -= factor * v;
          if (entry == 0) {
            rows_[i].erase(j);
            col_rows[j].erase(i);
          } else {
            col_rows[j].insert(i);
          }
        }
        rhs_[i] -= factor * rhs_[pivot];
      }
    }

    // back substitution in reverse elimination order
    std::vector<T> x(n_);
    for (int k = n_ - 1; k >= 0; --k) {
      int i = order[k];
      T acc = rhs_[i];
      T diag{};
      for (const auto& [j, v] : rows_[i]) {
        if (j == i)
          diag = v;
        else
          acc -= v * x[j];
      }
      if (diag == 0) throw SingularSystem("zero diagonal in back substitution");
      x[i] = acc / diag;
    }
    return x;
  }

 private:
  int n_;
  std::vector<std::map<int, T>> rows_;
  std::vector<T> rhs_;
};

}  // namespace starcp

#endif  // STARCP_LINSOLVE_HPP
