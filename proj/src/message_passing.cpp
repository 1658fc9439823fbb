#include "fbethe/message_passing.hpp"

#include <algorithm>
#include <cmath>

namespace fbethe {

std::string_view to_string(MPStatus s) {
  switch (s) {
    case MPStatus::Converged: return "Converged";
    case MPStatus::Oscillating: return "Oscillating";
    case MPStatus::IterationCap: return "IterationCap";
    case MPStatus::BeliefNotNormalizable: return "BeliefNotNormalizable";
  }
  return "Unknown";
}

std::string_view to_string(Schedule s) { return s == Schedule::Synchronous ? "synchronous" : "round-robin"; }

std::string_view to_string(InitScheme s) { return s == InitScheme::Unit ? "unit" : "symmetric"; }

void MPOptions::check() const {
  if (!(damping >= 0.0 && damping < 1.0)) throw UsageError("mp: damping must lie in [0, 1)");
  if (!(tolerance > 0.0)) throw UsageError("mp: tolerance must be positive");
  if (max_sweeps < 1) throw UsageError("mp: max_sweeps must be at least 1");
}

Partition partition_symmetric(const NormalizedModel& model) {
  const auto& edges = model.edges();
  Partition p;
  p.shares.resize(edges.size());
  p.a = Vector::Ones(model.n());
  p.b = model.h();
  for (int k = 0; k < model.n(); ++k) {
    if (model.base().degree(k) > 0) {
      p.a(k) = 0.0;
      p.b(k) = 0.0;
    }
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double di = model.base().degree(edges[e].i);
    const double dj = model.base().degree(edges[e].j);
    p.shares[e] = {1.0 / di, 1.0 / dj, model.h()(edges[e].i) / di, model.h()(edges[e].j) / dj};
  }
  return p;
}

Partition partition_normalizable(const NormalizedModel& model, const SpectralResult& spectrum) {
  if (!(spectrum.lambda_max < 1.0 - kBoundaryBand)) {
    throw DomainError("partition_normalizable: model is not pairwise normalizable (lambda_max = " +
                      std::to_string(spectrum.lambda_max) + ")");
  }
  const auto& edges = model.edges();
  const Vector& u = spectrum.u_max;
  Partition p;
  p.shares.resize(edges.size());
  p.a = Vector::Ones(model.n());
  p.b = model.h();
  for (int k = 0; k < model.n(); ++k) {
    if (model.base().degree(k) > 0) p.b(k) = 0.0;
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    const double lambda = spectrum.component_lambda[static_cast<std::size_t>(spectrum.component_of[static_cast<std::size_t>(i)])];
    const double c = 0.5 * (1.0 + 1.0 / lambda);
    const double r = std::abs(model.coupling(static_cast<int>(e)));
    const double di = model.base().degree(i);
    const double dj = model.base().degree(j);
    p.shares[e] = {c * r * u(j) / u(i), c * r * u(i) / u(j), model.h()(i) / di, model.h()(j) / dj};
    p.a(i) -= p.shares[e].gamma_i;
    p.a(j) -= p.shares[e].gamma_j;
  }
  return p;
}

double partition_defect(const NormalizedModel& model, const Partition& partition) {
  Vector diag = partition.a;
  Vector lin = partition.b;
  const auto& edges = model.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    diag(edges[e].i) += partition.shares[e].gamma_i;
    diag(edges[e].j) += partition.shares[e].gamma_j;
    lin(edges[e].i) += partition.shares[e].eta_i;
    lin(edges[e].j) += partition.shares[e].eta_j;
  }
  return std::max((diag - model.J().diagonal()).lpNorm<Eigen::Infinity>(),
                  (lin - model.h()).lpNorm<Eigen::Infinity>());
}

bool partition_is_normalizable(const NormalizedModel& model, const Partition& partition) {
  if (!(partition.a.array() > 0.0).all()) return false;
  const auto& edges = model.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const EdgeShare& s = partition.shares[e];
    const double r = model.coupling(static_cast<int>(e));
    if (!(s.gamma_i > 0.0 && s.gamma_j > 0.0 && s.gamma_i * s.gamma_j - r * r > 0.0)) return false;
  }
  return true;
}

namespace {

void check_layout(const NormalizedModel& model, const Partition& partition) {
  if (partition.shares.size() != model.edges().size() || partition.a.size() != model.n() ||
      partition.b.size() != model.n()) {
    throw UsageError("partition does not match the model");
  }
}

void check_layout(const NormalizedModel& model, const MessageSet& messages) {
  if (messages.edges.size() != model.edges().size()) throw UsageError("message set does not match the model");
}

// Smallest λ ≥ −a/d making (a_i + d_i λ)(a_j + d_j λ) ≥ r² with both factors positive.
double pair_threshold(double ai, double di, double aj, double dj, double r) {
  const double qa = di * dj;
  const double qb = ai * dj + aj * di;
  const double qc = ai * aj - r * r;
  const double root = (-qb + std::sqrt(std::max(0.0, qb * qb - 4.0 * qa * qc))) / (2.0 * qa);
  return std::max({root, -ai / di, -aj / dj});
}

}  // namespace

double symmetric_init_precision(const NormalizedModel& model, const Partition& partition) {
  check_layout(model, partition);
  double deficit = 0.0;
  for (int k = 0; k < model.n(); ++k) {
    const int d = model.base().degree(k);
    if (d > 0) deficit = std::max(deficit, -partition.a(k) / d);
  }
  const auto& edges = model.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    deficit = std::max(deficit, pair_threshold(partition.a(i), model.base().degree(i), partition.a(j),
                                               model.base().degree(j), model.coupling(static_cast<int>(e))));
  }
  return deficit + 1.0;
}

MessageSet init_messages(const NormalizedModel& model, const Partition& partition, InitScheme scheme) {
  check_layout(model, partition);
  MessageSet set;
  set.edges.resize(model.edges().size());
  if (scheme == InitScheme::Unit) {
    if (!partition_is_normalizable(model, partition))
      throw UsageError("init_messages: unit initialization requires a normalizable partition");
    return set;
  }
  const double lambda0 = symmetric_init_precision(model, partition);
  for (auto& m : set.edges) {
    m.to_i = {lambda0, 0.0};
    m.to_j = {lambda0, 0.0};
  }
  return set;
}

namespace {

struct NodeBeliefs {
  Vector precision;
  Vector shift;
};

NodeBeliefs node_beliefs(const NormalizedModel& model, const Partition& partition, const MessageSet& messages) {
  NodeBeliefs nb{partition.a, partition.b};
  const auto& edges = model.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    nb.precision(edges[e].i) += messages.edges[e].to_i.precision;
    nb.shift(edges[e].i) += messages.edges[e].to_i.shift;
    nb.precision(edges[e].j) += messages.edges[e].to_j.precision;
    nb.shift(edges[e].j) += messages.edges[e].to_j.shift;
  }
  return nb;
}

// Tilted pair q^{∖ij}·Ψ_ij^α in canonical form.
struct TiltedPair {
  double a11, a22, a12, b1, b2;
  double det() const { return a11 * a22 - a12 * a12; }
  bool proper() const { return a11 > 0.0 && a22 > 0.0 && det() > 0.0; }
};

TiltedPair tilted_pair(double alpha, double coupling, const EdgeShare& share, const EdgeMessages& msg,
                       double prec_i, double shift_i, double prec_j, double shift_j) {
  return {prec_i - alpha * msg.to_i.precision + alpha * share.gamma_i,
          prec_j - alpha * msg.to_j.precision + alpha * share.gamma_j, alpha * coupling,
          shift_i - alpha * msg.to_i.shift + alpha * share.eta_i,
          shift_j - alpha * msg.to_j.shift + alpha * share.eta_j};
}

// Projection/cavity ratio raised to 1/α, simplified in closed form:
//   λ_{→i} = γ_i − αR²/A₂₂,  ν_{→i} = η_i − R·B₂/A₂₂  (and symmetrically for j).
EdgeMessages edge_update(double alpha, double coupling, const EdgeShare& share, const TiltedPair& t) {
  EdgeMessages out;
  out.to_i = {share.gamma_i - alpha * coupling * coupling / t.a22, share.eta_i - coupling * t.b2 / t.a22};
  out.to_j = {share.gamma_j - alpha * coupling * coupling / t.a11, share.eta_j - coupling * t.b1 / t.a11};
  return out;
}

CanonicalMessage blend(const CanonicalMessage& update, const CanonicalMessage& old, double damping) {
  return {(1.0 - damping) * update.precision + damping * old.precision,
          (1.0 - damping) * update.shift + damping * old.shift};
}

double change(const CanonicalMessage& a, const CanonicalMessage& b) {
  return std::max(std::abs(a.precision - b.precision), std::abs(a.shift - b.shift));
}

}  // namespace

bool mp_sweep(const NormalizedModel& model, const AlphaAssignment& alphas, const Partition& partition,
              MessageSet& messages, const MPOptions& opts, double* residual) {
  const auto& edges = model.edges();
  double res = 0.0;

  if (opts.schedule == Schedule::Synchronous) {
    const NodeBeliefs nb = node_beliefs(model, partition, messages);
    std::vector<EdgeMessages> next(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [i, j] = edges[e];
      const double r = model.coupling(static_cast<int>(e));
      const TiltedPair t = tilted_pair(alphas[e], r, partition.shares[e], messages.edges[e], nb.precision(i),
                                       nb.shift(i), nb.precision(j), nb.shift(j));
      if (!t.proper()) return false;
      const EdgeMessages upd = edge_update(alphas[e], r, partition.shares[e], t);
      next[e].to_i = blend(upd.to_i, messages.edges[e].to_i, opts.damping);
      next[e].to_j = blend(upd.to_j, messages.edges[e].to_j, opts.damping);
      res = std::max({res, change(next[e].to_i, messages.edges[e].to_i), change(next[e].to_j, messages.edges[e].to_j)});
    }
    messages.edges = std::move(next);
  } else {
    // Sequential: beliefs are kept current after every edge update.
    NodeBeliefs nb = node_beliefs(model, partition, messages);
    MessageSet work = messages;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [i, j] = edges[e];
      const double r = model.coupling(static_cast<int>(e));
      EdgeMessages& cur = work.edges[e];
      const TiltedPair t =
          tilted_pair(alphas[e], r, partition.shares[e], cur, nb.precision(i), nb.shift(i), nb.precision(j), nb.shift(j));
      if (!t.proper()) return false;
      const EdgeMessages upd = edge_update(alphas[e], r, partition.shares[e], t);
      const EdgeMessages next{blend(upd.to_i, cur.to_i, opts.damping), blend(upd.to_j, cur.to_j, opts.damping)};
      res = std::max({res, change(next.to_i, cur.to_i), change(next.to_j, cur.to_j)});
      nb.precision(i) += next.to_i.precision - cur.to_i.precision;
      nb.shift(i) += next.to_i.shift - cur.to_i.shift;
      nb.precision(j) += next.to_j.precision - cur.to_j.precision;
      nb.shift(j) += next.to_j.shift - cur.to_j.shift;
      cur = next;
    }
    messages.edges = std::move(work.edges);
  }
  ++messages.iteration;
  if (residual) *residual = res;
  return true;
}

Moments beliefs(const NormalizedModel& model, const AlphaAssignment& alphas, const Partition& partition,
                const MessageSet& messages) {
  check_layout(model, partition);
  check_layout(model, messages);
  alphas.check_matches(model.base());
  const NodeBeliefs nb = node_beliefs(model, partition, messages);
  if (!(nb.precision.array() > 0.0).all()) throw DomainError("beliefs: a node belief is not normalizable");
  Moments out;
  out.m = nb.shift.cwiseQuotient(nb.precision);
  out.sigma = nb.precision.cwiseInverse().cwiseSqrt();
  const auto& edges = model.edges();
  out.sigma_pair.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    const TiltedPair t = tilted_pair(alphas[e], model.coupling(static_cast<int>(e)), partition.shares[e],
                                     messages.edges[e], nb.precision(i), nb.shift(i), nb.precision(j), nb.shift(j));
    if (!t.proper()) throw DomainError("beliefs: a pair belief is not normalizable");
    out.sigma_pair[e] = -t.a12 / t.det();
  }
  return out;
}

MPResult mp_run(const NormalizedModel& model, const AlphaAssignment& alphas, const Partition& partition,
                MessageSet messages, const MPOptions& opts) {
  opts.check();
  check_layout(model, partition);
  check_layout(model, messages);
  alphas.check_matches(model.base());

  MPResult result;
  result.damping = opts.damping;
  const int half = opts.max_sweeps / 2;
  double best_first_half = std::numeric_limits<double>::infinity();
  double best_second_half = std::numeric_limits<double>::infinity();

  auto normalizable = [&](const MessageSet& msgs) {
    const NodeBeliefs nb = node_beliefs(model, partition, msgs);
    return (nb.precision.array() > 0.0).all();
  };

  result.status = MPStatus::IterationCap;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double res = 0.0;
    if (!mp_sweep(model, alphas, partition, messages, opts, &res) || !normalizable(messages)) {
      result.status = MPStatus::BeliefNotNormalizable;
      result.residual = res;
      result.iterations = sweep + 1;
      result.messages = std::move(messages);
      return result;
    }
    result.residual = res;
    result.iterations = sweep + 1;
    if (!std::isfinite(res)) break;
    if (res <= opts.tolerance) {
      result.status = MPStatus::Converged;
      break;
    }
    double& best = sweep < half ? best_first_half : best_second_half;
    best = std::min(best, res);
  }

  if (result.status != MPStatus::Converged && std::isfinite(result.residual) &&
      best_second_half >= 0.5 * best_first_half) {
    result.status = MPStatus::Oscillating;
  }
  result.messages = std::move(messages);
  try {
    result.beliefs = beliefs(model, alphas, partition, result.messages);
  } catch (const DomainError&) {
    if (result.status == MPStatus::Converged) result.status = MPStatus::BeliefNotNormalizable;
  }
  return result;
}

}  // namespace fbethe
