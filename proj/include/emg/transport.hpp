#pragma once

// Exact Wasserstein-1 between finitely supported measures: the transportation
// LP solved by the MODI/network-simplex method on a spanning-tree basis with
// first-index (Bland) pivoting, plus dual certificates, a Lipschitz-witness
// lower bound, and a vertex-enumeration brute-force oracle for tiny instances.

#include "emg/ground.hpp"
#include "emg/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace emg {

struct PlanEntry {
    std::size_t i = 0;
    std::size_t j = 0;
    double mass = 0.0;
    double cost = 0.0;
};

struct TransportResult {
    double value = 0.0;
    std::vector<PlanEntry> plan;
    std::vector<double> dual_u;  // potentials on mu atoms
    std::vector<double> dual_v;  // potentials on nu atoms
    double entry_error = 0.0;    // per-cost-entry truncation bound
    double prune_slack = 0.0;    // mass dropped by pruning times diameter
    double slack() const { return entry_error + prune_slack; }
};

struct CostMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> c;  // row-major
    double entry_error = 0.0;
    double at(std::size_t i, std::size_t j) const { return c[i * cols + j]; }
};

inline CostMatrix cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.ground() != nu.ground())
        throw std::invalid_argument("measures must share a ground space");
    const auto& g = *mu.ground();
    CostMatrix cm;
    cm.rows = mu.support_size();
    cm.cols = nu.support_size();
    cm.entry_error = g.entry_error();
    cm.c.resize(cm.rows * cm.cols);
    for (std::size_t i = 0; i < cm.rows; ++i)
        for (std::size_t j = 0; j < cm.cols; ++j)
            cm.c[i * cm.cols + j] = g.distance(mu.atoms()[i].point, nu.atoms()[j].point);
    return cm;
}

namespace detail {

// Transportation simplex on dense cost matrix. Supplies/demands are doubles
// that sum to the same total within 1e-10.
class TransportSimplex {
public:
    TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                     const std::vector<double>& cost)
        : R_(supply.size()), C_(demand.size()), a_(std::move(supply)), b_(std::move(demand)),
          c_(cost) {
        double sa = 0, sb = 0;
        for (double x : a_) sa += x;
        for (double x : b_) sb += x;
        if (std::abs(sa - sb) > 1e-10)
            throw std::invalid_argument("transport: supply/demand mismatch beyond 1e-10");
        // absorb the tiny imbalance so the last NW-corner step closes exactly
        if (!b_.empty()) b_.back() += sa - sb;
        x_.assign(R_ * C_, 0.0);
        in_basis_.assign(R_ * C_, false);
        northwest_corner();
    }

    // Dantzig pivoting (most negative reduced cost, first-index ties) for
    // speed; a degenerate-pivot streak switches to Bland's first-index rule,
    // whose anti-cycling guarantee ensures termination.
    void solve() {
        const double scale = std::max(1.0, max_abs_cost());
        const double enter_tol = 1e-12 * scale;
        const std::size_t max_iters = 64 * (R_ + C_) * (R_ + C_) + 4096;
        const std::size_t stall_threshold = 2 * (R_ + C_) + 16;
        std::size_t degenerate_streak = 0;
        for (std::size_t iter = 0; iter < max_iters; ++iter) {
            compute_potentials();
            const bool bland = degenerate_streak > stall_threshold;
            std::size_t ei = R_, ej = C_;
            double best = -enter_tol;
            for (std::size_t i = 0; i < R_; ++i) {
                const double ui = u_[i];
                for (std::size_t j = 0; j < C_; ++j) {
                    if (in_basis_[i * C_ + j]) continue;
                    const double rc = c_[i * C_ + j] - ui - v_[j];
                    if (rc < best) {
                        best = rc;
                        ei = i;
                        ej = j;
                        if (bland) break;  // first eligible cell
                    }
                }
                if (bland && ei != R_) break;
            }
            if (ei == R_) return;  // optimal
            const double theta = pivot(ei, ej);
            degenerate_streak = (theta <= 1e-18) ? degenerate_streak + 1 : 0;
        }
        throw std::runtime_error("transport simplex failed to converge");
    }

    double objective() const {
        double s = 0;
        for (std::size_t k = 0; k < x_.size(); ++k) s += x_[k] * c_[k];
        return s;
    }

    const std::vector<double>& plan() const { return x_; }
    const std::vector<double>& potentials_u() const { return u_; }
    const std::vector<double>& potentials_v() const { return v_; }
    const std::vector<bool>& basis() const { return in_basis_; }

private:
    double max_abs_cost() const {
        double m = 0;
        for (double x : c_) m = std::max(m, std::abs(x));
        return m;
    }

    void northwest_corner() {
        std::vector<double> ra = a_, rb = b_;
        std::size_t i = 0, j = 0;
        while (i < R_ && j < C_) {
            const double t = std::min(ra[i], rb[j]);
            x_[i * C_ + j] = t;
            in_basis_[i * C_ + j] = true;
            ra[i] -= t;
            rb[j] -= t;
            if (i + 1 == R_ && j + 1 == C_) break;
            // keep exactly R+C-1 basic cells: advance one index per step
            if (ra[i] <= rb[j] && i + 1 < R_) {
                ++i;
            } else if (j + 1 < C_) {
                ++j;
            } else {
                ++i;
            }
        }
    }

    // Potentials from the basis tree: u_i + v_j = c_ij on basic cells.
    void compute_potentials() {
        u_.assign(R_, std::numeric_limits<double>::quiet_NaN());
        v_.assign(C_, std::numeric_limits<double>::quiet_NaN());
        if (rows_of_col_.size() != C_) rows_of_col_.resize(C_);
        if (cols_of_row_.size() != R_) cols_of_row_.resize(R_);
        for (auto& v : rows_of_col_) v.clear();
        for (auto& v : cols_of_row_) v.clear();
        for (std::size_t i = 0; i < R_; ++i)
            for (std::size_t j = 0; j < C_; ++j)
                if (in_basis_[i * C_ + j]) {
                    cols_of_row_[i].push_back(j);
                    rows_of_col_[j].push_back(i);
                }
        // BFS from row 0 across the (connected) basis tree
        std::vector<std::size_t> stack;
        u_[0] = 0.0;
        stack.push_back(0);  // encode rows as k, cols as R_+k
        while (!stack.empty()) {
            const std::size_t node = stack.back();
            stack.pop_back();
            if (node < R_) {
                for (std::size_t j : cols_of_row_[node])
                    if (std::isnan(v_[j])) {
                        v_[j] = c_[node * C_ + j] - u_[node];
                        stack.push_back(R_ + j);
                    }
            } else {
                const std::size_t j = node - R_;
                for (std::size_t i : rows_of_col_[j])
                    if (std::isnan(u_[i])) {
                        u_[i] = c_[i * C_ + j] - v_[j];
                        stack.push_back(i);
                    }
            }
        }
        for (double x : u_)
            if (std::isnan(x)) throw std::runtime_error("transport basis lost connectivity");
        for (double x : v_)
            if (std::isnan(x)) throw std::runtime_error("transport basis lost connectivity");
    }

    // Unique cycle of basis + entering cell (ei, ej): path in the basis tree
    // from row ei to col ej, then the entering edge closes it. Returns theta.
    double pivot(std::size_t ei, std::size_t ej) {
        // parent search from row ei to col ej over basis edges
        const std::size_t NONE = ~std::size_t{0};
        std::vector<std::size_t> parent(R_ + C_, NONE);
        std::vector<bool> seen(R_ + C_, false);
        std::vector<std::size_t> queue{ei};
        seen[ei] = true;
        while (!queue.empty()) {
            const std::size_t node = queue.back();
            queue.pop_back();
            if (node == R_ + ej) break;
            if (node < R_) {
                for (std::size_t j : cols_of_row_[node])
                    if (!seen[R_ + j]) {
                        seen[R_ + j] = true;
                        parent[R_ + j] = node;
                        queue.push_back(R_ + j);
                    }
            } else {
                for (std::size_t i : rows_of_col_[node - R_])
                    if (!seen[i]) {
                        seen[i] = true;
                        parent[i] = node;
                        queue.push_back(i);
                    }
            }
        }
        if (!seen[R_ + ej]) throw std::runtime_error("transport pivot: no cycle found");
        // reconstruct path ei -> ej as alternating cells
        std::vector<std::pair<std::size_t, std::size_t>> minus, plus;
        plus.push_back({ei, ej});
        std::size_t node = R_ + ej;
        bool donor = true;  // edges along the path alternate -,+,-,... starting at (path end)
        while (node != ei) {
            const std::size_t par = parent[node];
            std::size_t i, j;
            if (node < R_) {
                i = node;
                j = par - R_;
            } else {
                i = par;
                j = node - R_;
            }
            (donor ? minus : plus).push_back({i, j});
            donor = !donor;
            node = par;
        }
        double theta = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> leave{R_, C_};
        for (const auto& [i, j] : minus) {
            const double xv = x_[i * C_ + j];
            if (xv < theta - 1e-18 ||
                (std::abs(xv - theta) <= 1e-18 &&
                 (i < leave.first || (i == leave.first && j < leave.second)))) {
                theta = xv;
                leave = {i, j};
            }
        }
        for (const auto& [i, j] : plus) x_[i * C_ + j] += theta;
        for (const auto& [i, j] : minus) x_[i * C_ + j] -= theta;
        x_[leave.first * C_ + leave.second] = 0.0;
        in_basis_[leave.first * C_ + leave.second] = false;
        in_basis_[ei * C_ + ej] = true;
        return theta;
    }

    std::size_t R_, C_;
    std::vector<double> a_, b_, c_, x_, u_, v_;
    std::vector<bool> in_basis_;
    std::vector<std::vector<std::size_t>> rows_of_col_, cols_of_row_;
};

struct Marginals {
    std::vector<double> w;
    double pruned = 0.0;
};

// Weights as doubles with tiny atoms pruned (their mass is redistributed
// proportionally; the induced W1 shift is bounded by pruned * diameter).
inline Marginals to_doubles_pruned(const DiscreteMeasure& mu, double rel_tol = 1e-18) {
    Marginals m;
    m.w = mu.real_weights();
    double total = 0.0;
    for (const double w : m.w) total += w;
    double kept = 0.0;
    for (double& w : m.w) {
        if (w < rel_tol * total) {
            m.pruned += w;
            w = 0.0;
        } else {
            kept += w;
        }
    }
    const double target = 1.0;
    if (kept <= 0) throw std::logic_error("measure pruned to nothing");
    for (double& w : m.w) w *= target / kept;
    return m;
}

}  // namespace detail

// Exact optimal transport on the given cost matrix; duals certify optimality.
inline TransportResult w1_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const CostMatrix& cm) {
    if (cm.rows != mu.support_size() || cm.cols != nu.support_size())
        throw std::invalid_argument("cost matrix does not match supports");
    auto ma = detail::to_doubles_pruned(mu);
    auto mb = detail::to_doubles_pruned(nu);

    // collapse pruned atoms out of the LP, keep index maps for the plan
    std::vector<std::size_t> ri, cj;
    std::vector<double> a, b;
    for (std::size_t i = 0; i < ma.w.size(); ++i)
        if (ma.w[i] > 0) {
            ri.push_back(i);
            a.push_back(ma.w[i]);
        }
    for (std::size_t j = 0; j < mb.w.size(); ++j)
        if (mb.w[j] > 0) {
            cj.push_back(j);
            b.push_back(mb.w[j]);
        }
    std::vector<double> cost(ri.size() * cj.size());
    for (std::size_t i = 0; i < ri.size(); ++i)
        for (std::size_t j = 0; j < cj.size(); ++j)
            cost[i * cj.size() + j] = cm.at(ri[i], cj[j]);

    detail::TransportSimplex ts(a, b, cost);
    ts.solve();

    TransportResult res;
    res.value = ts.objective();
    res.entry_error = cm.entry_error;
    res.prune_slack = (ma.pruned + mb.pruned) * mu.ground()->diameter_bound();
    res.dual_u.assign(mu.support_size(), 0.0);
    res.dual_v.assign(nu.support_size(), 0.0);
    for (std::size_t i = 0; i < ri.size(); ++i) res.dual_u[ri[i]] = ts.potentials_u()[i];
    for (std::size_t j = 0; j < cj.size(); ++j) res.dual_v[cj[j]] = ts.potentials_v()[j];
    for (std::size_t i = 0; i < ri.size(); ++i)
        for (std::size_t j = 0; j < cj.size(); ++j) {
            const double mass = ts.plan()[i * cj.size() + j];
            if (mass > 0)
                res.plan.push_back({ri[i], cj[j], mass, cost[i * cj.size() + j]});
        }
    return res;
}

inline TransportResult w1_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    return w1_exact(mu, nu, cost_matrix(mu, nu));
}

inline double w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    return w1_exact(mu, nu).value;
}

// Dual feasibility audit: plan marginals and complementary slackness.
inline void check_certificates(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const TransportResult& r, double feas_tol = 1e-10,
                               double slack_tol = 1e-9) {
    std::vector<double> row(mu.support_size(), 0.0), col(nu.support_size(), 0.0);
    double value = 0.0;
    for (const auto& e : r.plan) {
        row[e.i] += e.mass;
        col[e.j] += e.mass;
        value += e.mass * e.cost;
        if (e.mass > 0 && std::abs(r.dual_u[e.i] + r.dual_v[e.j] - e.cost) > slack_tol)
            throw std::logic_error("complementary slackness violated");
    }
    for (std::size_t i = 0; i < row.size(); ++i)
        if (std::abs(row[i] - mu.real_weights()[i]) > feas_tol + 1e-15)
            throw std::logic_error("plan row marginal infeasible");
    for (std::size_t j = 0; j < col.size(); ++j)
        if (std::abs(col[j] - nu.real_weights()[j]) > feas_tol + 1e-15)
            throw std::logic_error("plan column marginal infeasible");
    if (std::abs(value - r.value) > slack_tol) throw std::logic_error("plan cost mismatch");
    // strong duality
    double dual = 0.0;
    for (std::size_t i = 0; i < mu.support_size(); ++i)
        dual += r.dual_u[i] * mu.real_weights()[i];
    for (std::size_t j = 0; j < nu.support_size(); ++j)
        dual += r.dual_v[j] * nu.real_weights()[j];
    if (std::abs(dual - r.value) > slack_tol * std::max(1.0, std::abs(r.value)))
        throw std::logic_error("strong duality gap");
}

// |int phi dmu - int phi dnu| for a certified witness: |phi| <= 1 and
// |phi(a)-phi(b)| <= d(a,b) on all atom pairs (up to the entry error).
inline double w1_dual_lower_bound(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const std::vector<double>& phi_mu,
                                  const std::vector<double>& phi_nu) {
    if (phi_mu.size() != mu.support_size() || phi_nu.size() != nu.support_size())
        throw std::invalid_argument("witness values must match supports");
    const auto& g = *mu.ground();
    if (mu.ground() != nu.ground()) throw std::invalid_argument("ground mismatch");
    const double err = g.entry_error() + 1e-12;
    auto check_range = [](const std::vector<double>& v) {
        for (double x : v)
            if (std::abs(x) > 1.0 + 1e-12)
                throw std::invalid_argument("witness exceeds [-1,1]");
    };
    check_range(phi_mu);
    check_range(phi_nu);
    std::vector<std::pair<PointId, double>> pts;
    for (std::size_t i = 0; i < mu.support_size(); ++i) pts.push_back({mu.atoms()[i].point, phi_mu[i]});
    for (std::size_t j = 0; j < nu.support_size(); ++j) pts.push_back({nu.atoms()[j].point, phi_nu[j]});
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            const double d = g.distance(pts[a].first, pts[b].first);
            if (std::abs(pts[a].second - pts[b].second) > d + err)
                throw std::invalid_argument("witness violates the Lipschitz bound on atoms");
        }
    double s = 0.0;
    for (std::size_t i = 0; i < mu.support_size(); ++i)
        s += phi_mu[i] * mu.real_weights()[i];
    for (std::size_t j = 0; j < nu.support_size(); ++j)
        s -= phi_nu[j] * nu.real_weights()[j];
    return std::abs(s);
}

// Brute force over the vertices of the transportation polytope; oracle for
// solver validation on supports with |mu| * |nu| <= 16.
inline double brute_force_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostMatrix& cm) {
    const std::size_t R = mu.support_size(), C = nu.support_size();
    if (R * C > 16) throw std::invalid_argument("brute force limited to 16 cells");
    std::vector<double> a, b;
    for (const auto& at : mu.atoms()) a.push_back(to_double(at.weight));
    for (const auto& at : nu.atoms()) b.push_back(to_double(at.weight));

    const std::size_t cells = R * C;
    const std::size_t basis_size = R + C - 1;
    double best = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> pick;
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
        if (pick.size() == basis_size) {
            // solve tree flows by leaf elimination
            std::vector<double> ra = a, rb = b;
            std::vector<std::pair<std::size_t, std::size_t>> edges;
            for (std::size_t k : pick) edges.push_back({k / C, k % C});
            std::vector<int> rdeg(R, 0), cdeg(C, 0);
            for (auto& [i, j] : edges) {
                rdeg[i]++;
                cdeg[j]++;
            }
            std::vector<double> flow(edges.size(), 0.0);
            std::vector<bool> done(edges.size(), false);
            bool progress = true, feasible = true;
            std::size_t remaining = edges.size();
            while (remaining > 0 && progress) {
                progress = false;
                for (std::size_t e = 0; e < edges.size(); ++e) {
                    if (done[e]) continue;
                    auto [i, j] = edges[e];
                    if (rdeg[i] == 1) {
                        flow[e] = ra[i];
                        rb[j] -= ra[i];
                        ra[i] = 0;
                        rdeg[i]--;
                        cdeg[j]--;
                        done[e] = true;
                        --remaining;
                        progress = true;
                    } else if (cdeg[j] == 1) {
                        flow[e] = rb[j];
                        ra[i] -= rb[j];
                        rb[j] = 0;
                        rdeg[i]--;
                        cdeg[j]--;
                        done[e] = true;
                        --remaining;
                        progress = true;
                    }
                }
            }
            if (remaining > 0) return;  // cyclic subset, not a tree
            for (double f : flow) feasible = feasible && (f >= -1e-12);
            for (double r : ra) feasible = feasible && (std::abs(r) <= 1e-9);
            for (double r : rb) feasible = feasible && (std::abs(r) <= 1e-9);
            if (!feasible) return;
            double costv = 0.0;
            for (std::size_t e = 0; e < edges.size(); ++e)
                costv += std::max(flow[e], 0.0) * cm.at(edges[e].first, edges[e].second);
            best = std::min(best, costv);
            return;
        }
        for (std::size_t k = from; k < cells; ++k) {
            pick.push_back(k);
            rec(k + 1);
            pick.pop_back();
        }
    };
    rec(0);
    if (!std::isfinite(best)) throw std::logic_error("no feasible vertex found");
    return best;
}

inline double brute_force_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    return brute_force_w1(mu, nu, cost_matrix(mu, nu));
}

}  // namespace emg
