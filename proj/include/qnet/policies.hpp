#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qnet/linalg.hpp"
#include "qnet/potentials.hpp"
#include "qnet/regions.hpp"
#include "qnet/rng.hpp"
#include "qnet/topology.hpp"

namespace qnet {

struct Decision {
  IntVec departures;
  int vertex_id = 0;
  double objective = 0.0;  // <pressure . departures> under the policy weights
};

/// Everything a policy may look at in one slot. `x` is the true backlog and
/// is always what departures are truncated against; `weight_x` is the state
/// the weights are evaluated at (stale wrappers make them differ).
struct SlotContext {
  const QueueState& x;
  const QueueState& weight_x;
  const DepartureRegion& region;
  const NetworkTopology& topo;
  int constraint_state = 0;
  Rng* policy_rng = nullptr;
};

/// Argmax of <pressure . min(v, x)> over region vertices. Ties go to the
/// lowest vertex id, which makes trajectories reproducible and the argmax
/// invariant under positive scaling of the potential.
inline Decision select_max_scalar_at(const Potential& g,
                                     const QueueState& weight_x,
                                     const QueueState& x,
                                     const DepartureRegion& r,
                                     const NetworkTopology& t) {
  const RealVec p = pressure(g, weight_x, t);
  Decision best;
  best.objective = -std::numeric_limits<double>::infinity();
  IntVec scratch;
  for (std::size_t id = 0; id < r.vertices.size(); ++id) {
    truncate_into(r.vertices[id], x, scratch);
    const double v = dot(p, std::span<const std::int64_t>(scratch));
    if (v > best.objective) {
      best.objective = v;
      best.vertex_id = static_cast<int>(id);
      best.departures = scratch;
    }
  }
  return best;
}

inline Decision select_max_scalar(const Potential& g, const QueueState& x,
                                  const DepartureRegion& r,
                                  const NetworkTopology& t) {
  return select_max_scalar_at(g, x, x, r, t);
}

/// Per-state memory of pick-and-compare policies: the vertex employed at the
/// last epoch each constraint state was visited, initialized to idling.
struct PolicyMemory {
  std::vector<int> last_vertex;  // indexed by constraint state

  static PolicyMemory zeroed(const std::vector<DepartureRegion>& regions,
                             const std::vector<int>& region_of_state) {
    PolicyMemory m;
    m.last_vertex.resize(region_of_state.size());
    for (std::size_t s = 0; s < region_of_state.size(); ++s) {
      const auto& r = regions[static_cast<std::size_t>(region_of_state[s])];
      int z = r.zero_vertex();
      if (z < 0)
        throw std::invalid_argument("memory policy: region '" + r.label +
                                    "' lacks the zero vertex");
      m.last_vertex[s] = z;
    }
    return m;
  }
};

namespace detail {

/// Compare a uniformly drawn candidate vertex against the memorized one,
/// both truncated by the current backlog; the winner (memorized on ties)
/// becomes the new memory. By construction the chosen vector never scores
/// below the memorized one, and the candidate equals the true argmax vertex
/// with probability >= 1/|vertices|.
inline Decision pick_and_compare(const Potential& g, const SlotContext& ctx,
                                 int& mem_vertex,
                                 std::int64_t& violations) {
  const RealVec p = pressure(g, ctx.weight_x, ctx.topo);
  const auto& verts = ctx.region.vertices;
  const int cand_id =
      static_cast<int>(ctx.policy_rng->below(verts.size()));

  IntVec cand, mem;
  truncate_into(verts[static_cast<std::size_t>(cand_id)], ctx.x, cand);
  truncate_into(verts[static_cast<std::size_t>(mem_vertex)], ctx.x, mem);
  const double v_cand = dot(p, std::span<const std::int64_t>(cand));
  const double v_mem = dot(p, std::span<const std::int64_t>(mem));

  Decision d;
  if (v_cand > v_mem) {
    d.departures = std::move(cand);
    d.vertex_id = cand_id;
    d.objective = v_cand;
  } else {
    d.departures = std::move(mem);
    d.vertex_id = mem_vertex;
    d.objective = v_mem;
  }
  if (d.objective < v_mem - 1e-9) ++violations;
  mem_vertex = d.vertex_id;
  return d;
}

}  // namespace detail

inline Decision select_with_memory(const Potential& g, const QueueState& x,
                                   const DepartureRegion& r,
                                   const NetworkTopology& t,
                                   PolicyMemory& mem, Rng& rng) {
  std::int64_t violations = 0;
  SlotContext ctx{x, x, r, t, 0, &rng};
  return detail::pick_and_compare(g, ctx, mem.last_vertex.at(0), violations);
}

inline Decision select_memory_dynamic(const Potential& g, const QueueState& x,
                                      const DepartureRegion& r,
                                      const NetworkTopology& t,
                                      PolicyMemory& mem, int constraint_state,
                                      Rng& rng) {
  if (constraint_state < 0 ||
      static_cast<std::size_t>(constraint_state) >= mem.last_vertex.size())
    throw std::invalid_argument("memory policy: unknown constraint state");
  std::int64_t violations = 0;
  SlotContext ctx{x, x, r, t, constraint_state, &rng};
  return detail::pick_and_compare(
      g, ctx, mem.last_vertex[static_cast<std::size_t>(constraint_state)],
      violations);
}

/// Slot-by-slot departure selector. Policies are single-owner mutable state
/// confined to one replication; reset() restarts them for the next one.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Decision decide(const SlotContext& ctx) = 0;
  virtual void reset(const std::vector<DepartureRegion>& regions,
                     const std::vector<int>& region_of_state) = 0;
  virtual std::int64_t monotonicity_violations() const { return 0; }
  virtual std::string describe() const = 0;

  /// Potential whose gradient drives the weights (for drift diagnostics).
  virtual const Potential& potential() const = 0;
};

using PolicyPtr = std::unique_ptr<Policy>;

class MaxScalarPolicy final : public Policy {
 public:
  explicit MaxScalarPolicy(Potential g) : g_(std::move(g)) {}
  Decision decide(const SlotContext& ctx) override {
    return select_max_scalar_at(g_, ctx.weight_x, ctx.x, ctx.region,
                                ctx.topo);
  }
  void reset(const std::vector<DepartureRegion>&,
             const std::vector<int>&) override {}
  std::string describe() const override {
    return "max_scalar(" + g_.describe() + ")";
  }
  const Potential& potential() const override { return g_; }

 private:
  Potential g_;
};

class MemoryPolicy final : public Policy {
 public:
  explicit MemoryPolicy(Potential g) : g_(std::move(g)) {}
  Decision decide(const SlotContext& ctx) override {
    return detail::pick_and_compare(g_, ctx, mem_.last_vertex.at(0),
                                    violations_);
  }
  void reset(const std::vector<DepartureRegion>& regions,
             const std::vector<int>& region_of_state) override {
    if (region_of_state.size() != 1)
      throw std::invalid_argument(
          "memory policy requires static constraints; use memory_dyn");
    mem_ = PolicyMemory::zeroed(regions, region_of_state);
    violations_ = 0;
  }
  std::int64_t monotonicity_violations() const override {
    return violations_;
  }
  std::string describe() const override {
    return "memory(" + g_.describe() + ")";
  }
  const Potential& potential() const override { return g_; }

 private:
  Potential g_;
  PolicyMemory mem_;
  std::int64_t violations_ = 0;
};

class MemoryDynamicPolicy final : public Policy {
 public:
  explicit MemoryDynamicPolicy(Potential g) : g_(std::move(g)) {}
  Decision decide(const SlotContext& ctx) override {
    const auto s = static_cast<std::size_t>(ctx.constraint_state);
    if (s >= mem_.last_vertex.size())
      throw std::invalid_argument("memory policy: unknown constraint state");
    return detail::pick_and_compare(g_, ctx, mem_.last_vertex[s],
                                    violations_);
  }
  void reset(const std::vector<DepartureRegion>& regions,
             const std::vector<int>& region_of_state) override {
    mem_ = PolicyMemory::zeroed(regions, region_of_state);
    violations_ = 0;
  }
  std::int64_t monotonicity_violations() const override {
    return violations_;
  }
  std::string describe() const override {
    return "memory_dyn(" + g_.describe() + ")";
  }
  const Potential& potential() const override { return g_; }

 private:
  Potential g_;
  PolicyMemory mem_;
  std::int64_t violations_ = 0;
};

/// Evaluates the inner policy with delayed backlog information
/// Z_t = X_{t-d}. Truncation always uses the true state, so feasibility is
/// never compromised by the stale weights.
class StalePolicy final : public Policy {
 public:
  StalePolicy(PolicyPtr inner, int delay)
      : inner_(std::move(inner)), delay_(delay) {
    if (delay_ < 1)
      throw std::invalid_argument("stale policy: delay must be >= 1");
  }
  Decision decide(const SlotContext& ctx) override {
    history_.push_back(ctx.x);
    if (history_.size() > static_cast<std::size_t>(delay_) + 1)
      history_.pop_front();
    SlotContext delayed{ctx.x,   history_.front(), ctx.region,
                        ctx.topo, ctx.constraint_state, ctx.policy_rng};
    return inner_->decide(delayed);
  }
  void reset(const std::vector<DepartureRegion>& regions,
             const std::vector<int>& region_of_state) override {
    history_.clear();
    inner_->reset(regions, region_of_state);
  }
  std::int64_t monotonicity_violations() const override {
    return inner_->monotonicity_violations();
  }
  std::string describe() const override {
    return "stale(" + inner_->describe() +
           ", delay=" + std::to_string(delay_) + ")";
  }
  const Potential& potential() const override { return inner_->potential(); }

 private:
  PolicyPtr inner_;
  int delay_;
  std::deque<QueueState> history_;
};

/// Recomputes the vertex only every k-th slot and reuses it (truncated by
/// the current backlog) in between.
class FramePolicy final : public Policy {
 public:
  FramePolicy(PolicyPtr inner, int frame)
      : inner_(std::move(inner)), frame_(frame) {
    if (frame_ < 1)
      throw std::invalid_argument("frame policy: k must be >= 1");
  }
  Decision decide(const SlotContext& ctx) override {
    const bool recompute =
        slot_ % frame_ == 0 || held_vertex_ < 0 ||
        static_cast<std::size_t>(held_vertex_) >= ctx.region.vertices.size();
    ++slot_;
    if (recompute) {
      Decision d = inner_->decide(ctx);
      held_vertex_ = d.vertex_id;
      return d;
    }
    Decision d;
    d.vertex_id = held_vertex_;
    d.departures = truncate(
        ctx.region.vertices[static_cast<std::size_t>(held_vertex_)], ctx.x);
    d.objective = std::numeric_limits<double>::quiet_NaN();  // not evaluated
    return d;
  }
  void reset(const std::vector<DepartureRegion>& regions,
             const std::vector<int>& region_of_state) override {
    slot_ = 0;
    held_vertex_ = -1;
    inner_->reset(regions, region_of_state);
  }
  std::int64_t monotonicity_violations() const override {
    return inner_->monotonicity_violations();
  }
  std::string describe() const override {
    return "frame(" + inner_->describe() + ", k=" + std::to_string(frame_) +
           ")";
  }
  const Potential& potential() const override { return inner_->potential(); }

 private:
  PolicyPtr inner_;
  int frame_;
  std::int64_t slot_ = 0;
  int held_vertex_ = -1;
};

inline PolicyPtr wrap_stale(PolicyPtr inner, int delay) {
  return std::make_unique<StalePolicy>(std::move(inner), delay);
}

inline PolicyPtr wrap_frame(PolicyPtr inner, int frame) {
  return std::make_unique<FramePolicy>(std::move(inner), frame);
}

}  // namespace qnet
