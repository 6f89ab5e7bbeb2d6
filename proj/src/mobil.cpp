#include "mobilsim/mobil.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace mobilsim::mobil {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Already-overlapping current-lane gaps are clamped instead of rejected so
// the evaluation stays finite after a recorded collision.
constexpr double kMinEvalGap = 1e-3;

struct Lead {
  double gap;
  double v;
};

double eval_accel(const IdmEvaluator& eval, VehicleId id, double v,
                  const std::optional<Lead>& leader) {
  if (leader) {
    return eval(id, std::max(leader->gap, kMinEvalGap), v, leader->v);
  }
  return eval(id, kNoLeaderGap, v, v);
}

std::optional<Lead> as_lead(const std::optional<LeaderView>& l) {
  if (!l) return std::nullopt;
  return Lead{l->gap, l->v};
}

}  // namespace

double incentive(const ChangeContext& ctx, const IdmEvaluator& eval) {
  const Vehicle& sub = ctx.subject;
  if (ctx.target.leader && ctx.target.leader->gap <= 0.0) return -kInf;
  if (ctx.target.follower && ctx.target.follower->gap <= 0.0) return -kInf;

  const double a_c = eval_accel(eval, sub.id, sub.v, as_lead(ctx.current.leader));
  const double a_c_new = eval_accel(eval, sub.id, sub.v, as_lead(ctx.target.leader));

  double follower_terms = 0.0;
  if (ctx.target.follower) {
    const FollowerView& n = *ctx.target.follower;
    // Before the change, n follows the target-lane leader across the slot
    // the subject would occupy.
    std::optional<Lead> before;
    if (ctx.target.leader) {
      before = Lead{n.gap + sub.length + ctx.target.leader->gap, ctx.target.leader->v};
    }
    const double a_n = eval_accel(eval, n.id, n.v, before);
    const double a_n_new = eval(n.id, n.gap, n.v, sub.v);
    follower_terms += a_n_new - a_n;
  }
  if (ctx.current.follower) {
    const FollowerView& o = *ctx.current.follower;
    const double a_o =
        eval(o.id, std::max(o.gap, kMinEvalGap), o.v, sub.v);
    std::optional<Lead> after;
    if (ctx.current.leader) {
      after = Lead{o.gap + sub.length + ctx.current.leader->gap, ctx.current.leader->v};
    }
    const double a_o_new = eval_accel(eval, o.id, o.v, after);
    follower_terms += a_o_new - a_o;
  }
  return (a_c_new - a_c) + sub.mobil.p * follower_terms;
}

bool is_safe(const ChangeContext& ctx, const IdmEvaluator& eval, double b_safe) {
  if (ctx.target.leader && ctx.target.leader->gap <= 0.0) return false;
  if (ctx.target.follower && ctx.target.follower->gap <= 0.0) return false;
  if (ctx.target.follower) {
    const FollowerView& n = *ctx.target.follower;
    const double a_n_new = eval(n.id, n.gap, n.v, ctx.subject.v);
    if (a_n_new < -b_safe) return false;
  }
  // Symmetric bound on the subject itself: without it, a change planned
  // against a stale snapshot can put the subject harder on the brakes than
  // one discrete step can absorb.
  if (ctx.target.leader) {
    const LeaderView& l = *ctx.target.leader;
    const double a_c_new = eval(ctx.subject.id, l.gap, ctx.subject.v, l.v);
    if (a_c_new < -b_safe) return false;
  }
  return true;
}

Decision decide(const Vehicle& subject, const std::optional<ChangeContext>& left,
                const std::optional<ChangeContext>& right, const IdmEvaluator& eval) {
  struct Eval {
    double inc;
    bool qualifies;
  };
  auto eval_dir = [&](const std::optional<ChangeContext>& ctx) -> std::optional<Eval> {
    if (!ctx) return std::nullopt;
    const double inc = incentive(*ctx, eval);
    const bool safe = is_safe(*ctx, eval, subject.mobil.b_safe);
    return Eval{inc, safe && inc > subject.mobil.delta_a_th};
  };

  const auto l = eval_dir(left);
  const auto r = eval_dir(right);

  Decision d;
  if (l) d.incentive_left = l->inc;
  if (r) d.incentive_right = r->inc;

  const bool lq = l && l->qualifies;
  const bool rq = r && r->qualifies;
  if (lq && rq) {
    d.change = l->inc > r->inc ? LaneChange::kLeft : LaneChange::kRight;
  } else if (lq) {
    d.change = LaneChange::kLeft;
  } else if (rq) {
    d.change = LaneChange::kRight;
  }
  return d;
}

}  // namespace mobilsim::mobil
