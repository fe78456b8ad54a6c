#include "ddctmc/oracle.hpp"

#include <cmath>
#include <deque>
#include <random>
#include <unordered_map>

#include <Eigen/Sparse>

#include "ddctmc/errors.hpp"
#include "ddctmc/parallel.hpp"

namespace ddctmc {

namespace {

struct PState
{
  int y = 0;  // position
  int M = 0;  // running max (max at the last event while disarmed)
  int mn = 0; // running min (A only)
  int k = 0;  // completed events
  int armed = 1;

  std::uint64_t key() const
  {
    return (static_cast<std::uint64_t>(y) << 44) ^ (static_cast<std::uint64_t>(M) << 24) ^
           (static_cast<std::uint64_t>(mn) << 8) ^ (static_cast<std::uint64_t>(k) << 1) ^
           static_cast<std::uint64_t>(armed);
  }
};

struct Outcome
{
  cplx reward = 0.0;
  bool next = false;
  PState to;
};

// The augmented chain for one request: positions move by the generator, the bookkeeping
// coordinates follow the definitions of each quantity.
class ProductChain
{
public:
  ProductChain(const Generator &gen, const QuantityRequest &r) : gen_(gen), g_(gen.grid()), r_(r)
  {
    ix_ = g_.index_of(r.x);
    if (ix_ < 0) throw ValidationError("x is not a grid point");
    if (r.a <= 0.0) throw ValidationError("a must be positive");
    if (r.kind == QuantityKind::DrawdownBeforeDrawup_A) {
      if (r.b < r.a) throw UnsupportedRegime("drawdown-before-drawup needs b >= a");
      if (r.y > r.x + Grid::kTol) throw ValidationError("running minimum y must not exceed x");
      iy_ = g_.ceil_index(r.y);
      // off-grid minimum: mixture of the two neighbouring levels
      if (std::abs(g_[iy_] - r.y) > Grid::kTol) {
        iy_lo_ = iy_ - 1;
        wt_ = (r.y - g_[iy_lo_]) / g_.h;
      }
    }
    if (r.kind == QuantityKind::NthDrawdownWithRecovery_J || r.kind == QuantityKind::InsuranceWithRecovery_Jsum) {
      iy_ = g_.index_of(r.y);
      if (iy_ < 0 || iy_ < ix_) throw ValidationError("y must be a grid point at or above x");
    }
    if ((r.kind == QuantityKind::NthDrawdownNoRecovery_H || r.kind == QuantityKind::NthDrawdownWithRecovery_J) &&
        r.n < 1)
      throw ValidationError("n must be at least 1");
  }

  // Weight of the upper start level when the running minimum lies between grid levels.
  double upper_weight() const { return wt_; }

  // Returns false when the start is already terminal (value 0).
  bool start(PState &s, bool upper = true) const
  {
    s = PState{ix_, ix_, ix_, 0, 1};
    switch (r_.kind) {
    case QuantityKind::DrawdownBeforeDrawup_A:
      s.mn = upper ? iy_ : iy_lo_;
      if (s.mn < 0 || g_[ix_] - g_[s.mn] >= r_.b - Grid::kTol) return false;
      break;
    case QuantityKind::NthDrawdownWithRecovery_J:
    case QuantityKind::InsuranceWithRecovery_Jsum:
      s.M = iy_;
      s.armed = ix_ == iy_ ? 1 : 0;
      break;
    default: break;
    }
    return true;
  }

  cplx kill(const PState &s) const
  {
    switch (r_.kind) {
    case QuantityKind::OccupationUntilDrawdown_B: return r_.k ? r_.k(g_[s.y]) : r_.q;
    case QuantityKind::DrawdownOccupation_C: return r_.k2 ? r_.k2(g_[s.y], g_[s.M]) : r_.q;
    default: return r_.q;
    }
  }

  cplx f(int z) const { return r_.f ? r_.f(g_[z]) : cplx(1.0); }
  cplx f2(int z, int M) const
  {
    if (r_.f2) return r_.f2(g_[z], g_[M]);
    return f(z);
  }

  Outcome step(const PState &s, int z) const
  {
    Outcome o;
    o.to = s;
    o.to.y = z;
    const bool dd = g_.is_drawdown(z, s.M, r_.a);
    switch (r_.kind) {
    case QuantityKind::DrawdownLaplace_Q:
    case QuantityKind::OccupationUntilDrawdown_B:
    case QuantityKind::DrawdownOccupation_C:
      if (dd) {
        o.reward = f(z);
        return o;
      }
      o.to.M = std::max(s.M, z);
      break;
    case QuantityKind::DrawdownBeforeDrawup_A: {
      if (dd) {
        o.reward = f(z);
        return o;
      }
      o.to.M = std::max(s.M, z);
      o.to.mn = std::min(s.mn, z);
      if (g_[z] - g_[o.to.mn] >= r_.b - Grid::kTol) return o; // drawup first: nothing paid
      break;
    }
    case QuantityKind::NthDrawdownNoRecovery_H:
      if (dd) {
        if (s.k + 1 == r_.n) {
          o.reward = f(z);
          return o;
        }
        o.to.M = z;
        o.to.k = s.k + 1;
        break;
      }
      o.to.M = std::max(s.M, z);
      break;
    case QuantityKind::InsuranceNoRecovery_Hsum:
      if (dd) {
        o.reward = 1.0;
        o.to.M = z;
        break;
      }
      o.to.M = std::max(s.M, z);
      break;
    case QuantityKind::NthDrawdownWithRecovery_J:
    case QuantityKind::InsuranceWithRecovery_Jsum: {
      const bool sum = r_.kind == QuantityKind::InsuranceWithRecovery_Jsum;
      if (s.armed) {
        if (dd) {
          if (sum) {
            o.reward = 1.0;
          } else if (s.k + 1 == r_.n) {
            o.reward = f2(z, s.M);
            return o;
          }
          o.to.armed = 0;
          o.to.k = sum ? 0 : s.k + 1;
          break;
        }
        o.to.M = std::max(s.M, z);
      } else if (z >= s.M) {
        o.to.armed = 1;
        o.to.M = z;
      }
      break;
    }
    }
    o.next = true;
    return o;
  }

  const Generator &gen() const { return gen_; }

private:
  const Generator &gen_;
  const Grid &g_;
  const QuantityRequest &r_;
  int ix_ = 0, iy_ = 0, iy_lo_ = 0;
  double wt_ = 1.0;
};

std::vector<int> targets(const Generator &gen, int y)
{
  std::vector<int> out;
  if (gen.absorbing(y)) return out;
  int lo = 0, hi = gen.last();
  if (gen.is_tridiagonal()) {
    lo = std::max(y - 1, 0);
    hi = std::min(y + 1, gen.last());
  }
  for (int z = lo; z <= hi; ++z)
    if (z != y && gen.rate(y, z) != 0.0) out.push_back(z);
  return out;
}

} // namespace

int product_state_count(const Generator &gen, const QuantityRequest &req, int max_states)
{
  ProductChain chain(gen, req);
  PState s0;
  if (!chain.start(s0)) return 0;
  std::unordered_map<std::uint64_t, int> index;
  std::deque<PState> queue{s0};
  index[s0.key()] = 0;
  std::vector<std::vector<int>> tg(gen.size());
  for (int y = 0; y < gen.size(); ++y) tg[y] = targets(gen, y);
  while (!queue.empty()) {
    PState s = queue.front();
    queue.pop_front();
    for (int z : tg[s.y]) {
      Outcome o = chain.step(s, z);
      if (o.next && !index.count(o.to.key())) {
        int id = static_cast<int>(index.size());
        if (id >= max_states) throw TooLarge("product chain exceeds " + std::to_string(max_states) + " states");
        index[o.to.key()] = id;
        queue.push_back(o.to);
      }
    }
  }
  return static_cast<int>(index.size());
}

namespace {

cplx solve_from(const Generator &gen, const ProductChain &chain, const PState &s0, int max_states)
{
  std::vector<std::vector<int>> tg(gen.size());
  for (int y = 0; y < gen.size(); ++y) tg[y] = targets(gen, y);

  std::unordered_map<std::uint64_t, int> index;
  std::vector<PState> states{s0};
  index[s0.key()] = 0;
  std::vector<Eigen::Triplet<cplx>> trip;
  std::vector<cplx> rhs;
  for (std::size_t id = 0; id < states.size(); ++id) {
    PState s = states[id];
    rhs.push_back(0.0);
    if (gen.absorbing(s.y)) {
      trip.emplace_back(id, id, 1.0);
      continue;
    }
    trip.emplace_back(id, id, chain.kill(s) + gen.outflow(s.y));
    for (int z : tg[s.y]) {
      double rate = gen.rate(s.y, z);
      Outcome o = chain.step(s, z);
      rhs[id] += rate * o.reward;
      if (!o.next) continue;
      auto it = index.find(o.to.key());
      int to;
      if (it == index.end()) {
        to = static_cast<int>(states.size());
        if (to >= max_states) throw TooLarge("product chain exceeds " + std::to_string(max_states) + " states");
        index[o.to.key()] = to;
        states.push_back(o.to);
      } else {
        to = it->second;
      }
      trip.emplace_back(id, to, -rate);
    }
  }
  const int n = static_cast<int>(states.size());
  Eigen::SparseMatrix<cplx> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Vec<cplx> b = Eigen::Map<Vec<cplx>>(rhs.data(), n);
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Singular("product chain matrix is singular");
  Vec<cplx> v = lu.solve(b);
  double res = (A * v - b).cwiseAbs().maxCoeff();
  double scale = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(A, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  if (!v.allFinite() || res > 1e-9 * (scale * v.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff()))
    throw Singular("product chain solve failed the residual check");
  return v(0);
}

} // namespace

cplx dense_product_solve(const Generator &gen, const QuantityRequest &req, int max_states)
{
  ProductChain chain(gen, req);
  const double wt = chain.upper_weight();
  cplx v = 0.0;
  PState s0;
  if (chain.start(s0, true)) v += wt * solve_from(gen, chain, s0, max_states);
  if (wt < 1.0 && chain.start(s0, false)) v += (1.0 - wt) * solve_from(gen, chain, s0, max_states);
  return v;
}

McResult mc_estimate(const Generator &gen, const QuantityRequest &req, const McConfig &cfg)
{
  if (cfg.n_paths < 1) throw ValidationError("n_paths must be at least 1");
  if (!(cfg.horizon_cap > 0.0)) throw ValidationError("horizon_cap must be positive");
  if (req.q.imag() != 0.0) throw ValidationError("Monte Carlo needs a real Laplace argument");
  ProductChain chain(gen, req);
  McResult res;
  PState s_up, s_dn;
  const bool live_up = chain.start(s_up, true);
  const bool live_dn = chain.upper_weight() < 1.0 && chain.start(s_dn, false);
  if (!live_up && !live_dn) return res;

  // cumulative jump distribution per state
  const int n = gen.size();
  std::vector<std::vector<int>> tg(n);
  std::vector<std::vector<double>> cum(n);
  for (int y = 0; y < n; ++y) {
    tg[y] = targets(gen, y);
    double c = 0.0;
    for (int z : tg[y]) {
      if (gen.rate(y, z) < 0.0) throw ValidationError("Monte Carlo needs nonnegative transition rates");
      c += gen.rate(y, z);
      cum[y].push_back(c);
    }
  }

  const long P = cfg.n_paths;
  std::vector<double> value(P);
  std::vector<char> truncated(P, 0);
  constexpr long kChunk = 1024;
  const int chunks = static_cast<int>((P + kChunk - 1) / kChunk);
  parallel_for(chunks, cfg.threads, [&](int c) {
    for (long p = c * kChunk; p < std::min(P, (c + 1) * kChunk); ++p) {
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32)};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> U(0.0, 1.0);
      double t = 0.0, w = 1.0, total = 0.0;
      const bool upper = chain.upper_weight() >= 1.0 || U(rng) < chain.upper_weight();
      if (!(upper ? live_up : live_dn)) {
        value[p] = 0.0;
        continue;
      }
      PState s = upper ? s_up : s_dn;
      while (true) {
        if (gen.absorbing(s.y)) break;
        double out = cum[s.y].back();
        double tau = -std::log1p(-U(rng)) / out;
        t += tau;
        w *= std::exp(-chain.kill(s).real() * tau);
        if (w < 1e-16) break;
        if (t > cfg.horizon_cap) {
          if (w > 1e-12) truncated[p] = 1;
          break;
        }
        double u = U(rng) * out;
        const auto &cy = cum[s.y];
        int j = static_cast<int>(std::upper_bound(cy.begin(), cy.end(), u) - cy.begin());
        j = std::min(j, static_cast<int>(cy.size()) - 1);
        Outcome o = chain.step(s, tg[s.y][j]);
        total += w * o.reward.real();
        if (!o.next) break;
        s = o.to;
      }
      value[p] = total;
    }
  });
  double sum = 0.0, sum2 = 0.0;
  long ntr = 0;
  for (long p = 0; p < P; ++p) {
    sum += value[p];
    sum2 += value[p] * value[p];
    ntr += truncated[p];
  }
  res.estimate = sum / P;
  double var = P > 1 ? (sum2 - P * res.estimate * res.estimate) / (P - 1) : 0.0;
  res.std_error = std::sqrt(std::max(var, 0.0) / P);
  res.truncated_fraction = static_cast<double>(ntr) / P;
  if (res.truncated_fraction > 1e-3) throw HorizonCapHit(res.truncated_fraction);
  return res;
}

} // namespace ddctmc
