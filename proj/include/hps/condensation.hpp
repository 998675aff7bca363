#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hps/coefficients.hpp"
#include "hps/geometry.hpp"
#include "hps/local_ops.hpp"
#include "hps/sparse.hpp"

namespace hps {

struct BatchSchedule {
  std::size_t memory_budget = std::size_t{2} << 30;  // bytes
  std::size_t batch_size = 4;      // leaves in flight at once
  std::size_t resident_limit = 16;  // finished DtN blocks held before scattering
  std::size_t workers = 1;
  // Keep leaf factors after the build for reuse by later solves. Cached
  // factors are not counted against the memory budget.
  bool cache_leaves = false;
};

// Dense bytes of one leaf's A_ii factor, S and T^tau.
std::size_t estimate_workspace(std::size_t p, std::size_t d);
std::size_t estimate_workspace(std::size_t p, std::size_t d, CornerMode mode);

struct PhaseTimes {
  double dtn_assembly = 0.0;
  double t_assembly = 0.0;
  double factorize = 0.0;
  double load_reduction = 0.0;
  double interface_solve = 0.0;
  double interior_solve = 0.0;
};

struct ScheduleStats {
  std::size_t peak_bytes = 0;
  std::size_t batches = 0;
  std::size_t flushes = 0;
  std::size_t max_in_flight = 0;
};

// Rectangular compressed-row matrix (interface rows x Dirichlet columns).
struct CouplingMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::size_t> row_ptr, col_idx;
  std::vector<double> values;
  // y -= C x
  void subtract_product(const double* x, double* y) const;
};

struct DofRef {
  std::size_t leaf;
  std::size_t face_slot;  // position in the leaf's face order
  std::size_t node;       // node within the face
};

struct BuildOptions {
  FactorOptions factor;
  const SparseBackend* backend = nullptr;  // default backend when null
};

class InterfaceSystem {
 public:
  const Discretization& disc() const { return *disc_; }
  const CoefficientField& coeffs() const { return coeffs_; }
  const LeafTemplate& tmpl() const { return *tmpl_; }
  std::shared_ptr<const LeafTemplate> tmpl_ptr() const { return tmpl_; }
  const BatchSchedule& schedule() const { return schedule_; }

  std::size_t size() const { return t.size(); }
  // Leaf factors for `leaf`, from the cache or rebuilt.
  std::shared_ptr<const LeafFactors> leaf(std::size_t id, bool need_dtn) const;

  SparseMatrix t;
  CouplingMatrix dirichlet_coupling;
  std::unique_ptr<FactorizedSystem> factorization;
  // Two references per interface DOF: the low-side leaf, then the high side.
  std::vector<std::array<DofRef, 2>> dof_map;
  PhaseTimes build_times;
  ScheduleStats schedule_stats;
  std::size_t factorizations = 0;

 private:
  friend InterfaceSystem build(std::shared_ptr<const Discretization>, CoefficientField,
                               const BatchSchedule&, const BuildOptions&);
  std::shared_ptr<const Discretization> disc_;
  CoefficientField coeffs_;
  std::shared_ptr<const LeafTemplate> tmpl_;
  BatchSchedule schedule_;
  std::vector<std::shared_ptr<const LeafFactors>> cache_;
};

InterfaceSystem build(std::shared_ptr<const Discretization> disc, CoefficientField coeffs,
                      const BatchSchedule& schedule = {}, const BuildOptions& options = {});

// Values of the body load at every interior node (global interior
// numbering) and of the Dirichlet data at every Dirichlet node.
struct LoadData {
  std::vector<double> f;
  std::vector<double> g;
};

using ScalarFunction = std::function<double(const double*)>;
LoadData sample_load(const Discretization& disc, const ScalarFunction& f,
                     const ScalarFunction& g);

struct ReducedLoad {
  std::vector<double> v;    // A_ii^{-1} f, global interior numbering
  std::vector<double> g_b;  // interface right-hand side
  std::vector<double> g;    // Dirichlet values
  double seconds = 0.0;
};

ReducedLoad reduce_load(const InterfaceSystem& sys, const LoadData& load);

struct SolveReport {
  std::vector<double> u;  // every global node
  PhaseTimes wall_times;
  double residual = 0.0;
};

SolveReport solve(const InterfaceSystem& sys, const ReducedLoad& load);

// Build once, then any number of solves. Build phases are reported by the
// first solve only; later solves show zero for them.
class Solver {
 public:
  Solver(std::shared_ptr<const Discretization> disc, CoefficientField coeffs,
         const BatchSchedule& schedule = {}, const BuildOptions& options = {});

  SolveReport solve(const LoadData& load);
  SolveReport solve(const ScalarFunction& f, const ScalarFunction& g);
  const InterfaceSystem& system() const { return sys_; }

  struct Event {
    std::string phase;
    double seconds;
  };
  const std::vector<Event>& log() const { return log_; }

 private:
  InterfaceSystem sys_;
  bool reported_build_ = false;
  std::vector<Event> log_;
};

// Parallel for over [0, n) with up to `workers` threads. The first failing
// index (lowest id) determines the rethrown exception.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

}  // namespace hps
