#pragma once

#include "fbethe/diagnostics.hpp"
#include "fbethe/free_energy.hpp"

#include <string_view>
#include <vector>

namespace fbethe {

/// How one pair factor Ψ_ij(x_i, x_j) = exp(−½[γ_i x_i² + 2R_ij x_i x_j + γ_j x_j²] + η_i x_i + η_j x_j)
/// takes its share of the node terms. Shares are stored per edge, for the
/// edge's lower (i) and upper (j) endpoint.
struct EdgeShare {
  double gamma_i = 0.0;
  double gamma_j = 0.0;
  double eta_i = 0.0;
  double eta_j = 0.0;
};

/// Factorization p(x) ∝ Π_ij Ψ_ij Π_k exp(−½a_k x_k² + b_k x_k). For every node
/// a_k + Σ γ = J_kk and b_k + Σ η = h_k.
struct Partition {
  std::vector<EdgeShare> shares;
  Vector a;
  Vector b;
};

/// Splits the unit diagonal and h_k equally over the edges at each node
/// (a_k = 0 unless the node is isolated).
Partition partition_symmetric(const NormalizedModel& model);

/// γ_{i←ij} = c·|R_ij|·u_j/u_i with c = (1 + 1/λ_max)/2 per connected
/// component, which makes every pair factor and node residual normalizable.
/// Throws DomainError unless λ_max(|R|) < 1.
Partition partition_normalizable(const NormalizedModel& model, const SpectralResult& spectrum);

/// Max over nodes of |a_k + Σγ − 1| and |b_k + Ση − h_k|.
double partition_defect(const NormalizedModel& model, const Partition& partition);

/// True when a_k > 0 for all nodes and every pair factor precision is PD.
bool partition_is_normalizable(const NormalizedModel& model, const Partition& partition);

/// Canonical univariate Gaussian message exp(−½·precision·x² + shift·x).
struct CanonicalMessage {
  double precision = 0.0;
  double shift = 0.0;
};

/// Messages from edge (i, j) into its two endpoints.
struct EdgeMessages {
  CanonicalMessage to_i;
  CanonicalMessage to_j;
};

struct MessageSet {
  std::vector<EdgeMessages> edges;
  int iteration = 0;
};

enum class InitScheme { Unit, SymmetricNormalizing };

/// Unit: every message is the identity (0, 0); requires a normalizable
/// partition. SymmetricNormalizing: every message is (λ₀, 0) with λ₀ = 1 plus
/// the smallest λ ≥ 0 making all node beliefs and joined pair beliefs
/// [[a_i + d_i λ, R_ij], [R_ij, a_j + d_j λ]] positive definite.
MessageSet init_messages(const NormalizedModel& model, const Partition& partition, InitScheme scheme);

/// The common value λ₀ used by InitScheme::SymmetricNormalizing.
double symmetric_init_precision(const NormalizedModel& model, const Partition& partition);

enum class Schedule { Synchronous, RoundRobin };

struct MPOptions {
  Schedule schedule = Schedule::Synchronous;
  double damping = 0.0;  // new = (1 − damping)·update + damping·old
  double tolerance = 1e-10;
  int max_sweeps = 10000;

  void check() const;
};

/// Oscillating: the cap was hit without progress over the second half of the
/// run; IterationCap: the cap was hit while still improving, or the messages
/// blew up.
enum class MPStatus { Converged, Oscillating, IterationCap, BeliefNotNormalizable };

std::string_view to_string(MPStatus s);
std::string_view to_string(Schedule s);
std::string_view to_string(InitScheme s);

struct MPResult {
  MPStatus status = MPStatus::IterationCap;
  Moments beliefs;  // empty vectors unless all beliefs are proper
  double residual = 0.0;
  int iterations = 0;
  double damping = 0.0;  // damping the run used
  MessageSet messages;
};

/// Fractional (power-EP) Gaussian message passing. Per edge: remove the
/// α-fraction of the edge approximation from both endpoint beliefs, tilt the
/// cavity with Ψ_ij^α, project the tilted pair onto a factorized Gaussian, and
/// raise the projection/cavity ratio to 1/α. At α = 1 this is Gaussian BP.
MPResult mp_run(const NormalizedModel& model, const AlphaAssignment& alphas, const Partition& partition,
                MessageSet messages, const MPOptions& opts = {});

/// One sweep of updates (no convergence logic); used by mp_run and by tests
/// that follow message trajectories. Returns false if a tilted pair was not
/// normalizable, leaving `messages` untouched.
bool mp_sweep(const NormalizedModel& model, const AlphaAssignment& alphas, const Partition& partition,
              MessageSet& messages, const MPOptions& opts, double* residual = nullptr);

/// Node beliefs from the messages and pair covariances from the tilted pair
/// distributions. Throws DomainError if any of them is not normalizable.
Moments beliefs(const NormalizedModel& model, const AlphaAssignment& alphas, const Partition& partition,
                const MessageSet& messages);

}  // namespace fbethe
