#include "gpte/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace gpte {

namespace {

using vec = std::vector<real>;

struct precision_guard {
    unsigned saved;
    explicit precision_guard(int digits) : saved(real::default_precision()) {
        real::default_precision(unsigned(digits) + 20);
    }
    ~precision_guard() { real::default_precision(saved); }
};

real pow10r(const real& e) { return boost::multiprecision::pow(real(10), e); }

// slot layout of a boundary system along the interlaced order
struct System {
    std::vector<int> ks;
    std::vector<int> sign;    // +1 on the a side, -1 on b
    std::vector<int> var;     // -1 for a constant slot
    vec cval;
    int nv = 0;

    vec const_tot, const_mag;   // per exponent

    void prepare() {
        const_tot.assign(ks.size(), real(0));
        const_mag.assign(ks.size(), real(0));
        for (size_t r = 0; r < ks.size(); ++r) {
            int k = ks[r];
            for (size_t s = 0; s < var.size(); ++s) {
                if (var[s] >= 0 || cval[s] == 0) continue;
                real t = k == 0 ? real(log(cval[s])) : real(pow(cval[s], k));
                const_tot[r] += sign[s] * t;
                const_mag[r] += abs(t);
            }
        }
    }

    // relative residuals and Jacobian in u = log v
    void eval(const vec& u, vec& res, std::vector<vec>& jac) const {
        size_t m = ks.size();
        res.assign(m, real(0));
        jac.assign(m, vec(nv, real(0)));
        vec ek(nv);
        for (size_t r = 0; r < m; ++r) {
            int k = ks[r];
            real tot = const_tot[r], mag = const_mag[r];
            for (int j = 0; j < nv; ++j) ek[j] = k == 0 ? u[j] : real(exp(k * u[j]));
            for (size_t s = 0; s < var.size(); ++s) {
                int j = var[s];
                if (j < 0) continue;
                tot += sign[s] * ek[j];
                mag += abs(ek[j]);
                jac[r][j] += k == 0 ? real(sign[s]) : real(sign[s] * k * ek[j]);
            }
            if (mag == 0) mag = 1;
            res[r] = tot / mag;
            for (int j = 0; j < nv; ++j) jac[r][j] /= mag;
        }
    }

    real norm(const vec& u) const {
        vec r;
        std::vector<vec> j;
        eval(u, r, j);
        real mx = 0;
        for (auto& x : r) mx = std::max(mx, real(abs(x)));
        return mx;
    }
};

bool lin_solve(std::vector<vec> a, vec b, vec& x) {
    int n = int(b.size());
    for (int c = 0; c < n; ++c) {
        int p = c;
        for (int r = c + 1; r < n; ++r)
            if (abs(a[r][c]) > abs(a[p][c])) p = r;
        if (a[p][c] == 0 || !boost::multiprecision::isfinite(a[p][c])) return false;
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        for (int r = c + 1; r < n; ++r) {
            real f = a[r][c] / a[c][c];
            if (f == 0) continue;
            for (int q = c; q < n; ++q) a[r][q] -= f * a[c][q];
            b[r] -= f * b[c];
        }
    }
    x.assign(n, real(0));
    for (int r = n - 1; r >= 0; --r) {
        real s = b[r];
        for (int q = r + 1; q < n; ++q) s -= a[r][q] * x[q];
        x[r] = s / a[r][r];
        if (!boost::multiprecision::isfinite(x[r])) return false;
    }
    return true;
}

struct NewtonResult {
    vec u;
    real res;
    int steps = 0;
    bool ok = false;
};

NewtonResult newton(const System& sys, vec u, const real& tol, int maxit = 100) {
    NewtonResult out;
    vec r, d, un;
    std::vector<vec> jac;
    real cap = -pow10r(real(-40));
    for (int it = 0; it < maxit; ++it) {
        sys.eval(u, r, jac);
        real nr = 0;
        for (auto& x : r) nr = std::max(nr, real(abs(x)));
        out.res = nr;
        out.steps = it;
        if (!boost::multiprecision::isfinite(nr)) break;
        if (nr < tol) {
            out.u = u;
            out.ok = true;
            return out;
        }
        for (auto& x : r) x = -x;
        if (!lin_solve(jac, r, d)) break;
        real lam = 1;
        bool moved = false;
        while (lam > 1e-8) {
            un = u;
            for (size_t i = 0; i < u.size(); ++i) un[i] = std::min(real(u[i] + lam * d[i]), cap);
            real nn = sys.norm(un);
            if (boost::multiprecision::isfinite(nn) && nn < nr) {
                moved = true;
                break;
            }
            lam /= 2;
        }
        if (!moved) break;
        u = un;
    }
    out.u = u;
    return out;
}

// sort interchangeable unknowns into slot order, then require the values along the
// interlaced order to be non-increasing and inside (0,1]
bool canonicalize(const System& sys, vec& u) {
    std::map<std::pair<int, int>, std::vector<int>> groups;   // (sign, weight) -> vars
    std::vector<int> weight(sys.nv, 0), first(sys.nv, -1);
    std::vector<int> vsign(sys.nv, 0);
    for (size_t s = 0; s < sys.var.size(); ++s) {
        int j = sys.var[s];
        if (j < 0) continue;
        ++weight[j];
        vsign[j] = sys.sign[s];
        if (first[j] < 0) first[j] = int(s);
    }
    for (int j = 0; j < sys.nv; ++j) groups[{vsign[j], weight[j]}].push_back(j);
    for (auto& [key, js] : groups) {
        std::sort(js.begin(), js.end(), [&](int x, int y) { return first[x] < first[y]; });
        vec vals;
        for (int j : js) vals.push_back(u[j]);
        std::sort(vals.begin(), vals.end(), [](const real& x, const real& y) { return x > y; });
        for (size_t i = 0; i < js.size(); ++i) u[js[i]] = vals[i];
    }
    real prev = 2;
    real slack = pow10r(real(-20));
    for (size_t s = 0; s < sys.var.size(); ++s) {
        real v = sys.var[s] >= 0 ? real(exp(u[sys.var[s]])) : sys.cval[s];
        if (v > prev * (1 + slack)) return false;
        prev = v;
    }
    for (auto& x : u)
        if (!(x < 0)) return false;
    return true;
}

std::optional<NewtonResult> solve_once(const System& sys, const vec& guess, const real& tol) {
    auto r = newton(sys, guess, tol);
    if (!r.ok || !canonicalize(sys, r.u)) return std::nullopt;
    return r;
}

int gcd_of(const std::vector<int>& ks) {
    int g = 0;
    for (int k : ks) g = std::gcd(g, std::abs(k));
    return g ? g : 1;
}

enum class Kind { Doubled, Next, AlphaMax };

// slot plan: -2 const, -3 epsilon, otherwise var id
System build(const ExponentSpec& spec, Kind kind, const real& eps, const real& p1, const real& p2) {
    int n = spec.degree();
    auto order = interlace_order(n);
    System sys;
    sys.ks = spec.k;
    int slots = 2 * n + 2;
    sys.sign.resize(slots);
    sys.var.assign(slots, -1);
    sys.cval.assign(slots, real(0));
    for (int s = 0; s < slots; ++s) sys.sign[s] = order[s].side == 'a' ? 1 : -1;
    sys.cval[0] = 1;
    sys.cval[slots - 1] = eps;
    int nv = 0;
    int s = 1;
    if (kind == Kind::Next) {
        sys.cval[1] = p1;
        sys.var[2] = nv++;
        s = 3;
    } else if (kind == Kind::AlphaMax) {
        sys.cval[1] = p1;
        sys.cval[2] = p2;
        sys.var[3] = nv++;
        sys.var[4] = nv++;
        s = 5;
    }
    for (; s + 1 < slots; s += 2) {
        sys.var[s] = nv;
        sys.var[s + 1] = nv;
        ++nv;
    }
    sys.nv = nv;
    sys.prepare();
    return sys;
}

struct Continuation {
    std::function<System(const real&)> make;
    std::vector<std::pair<real, vec>> hist;
    real tol;
    real max_step;
    int solves = 0;

    // march from the last history point to target; false if the step size collapses
    bool advance(const real& target, real step) {
        real p = hist.back().first;
        int dir = target > p ? 1 : -1;
        size_t n = hist.back().second.size();
        while (p != target) {
            real np = p + dir * step;
            if ((dir > 0 && np > target) || (dir < 0 && np < target)) np = target;
            vec g = hist.back().second;
            if (hist.size() >= 2) {
                auto& [p1, u1] = hist[hist.size() - 2];
                auto& [p2, u2] = hist.back();
                for (size_t i = 0; i < n; ++i) g[i] = u2[i] + (u2[i] - u1[i]) * (np - p2) / (p2 - p1);
            }
            ++solves;
            auto r = solve_once(make(np), g, tol);
            if (!r) {
                step /= 2;
                if (step < pow10r(real(-12))) return false;
                continue;
            }
            p = np;
            hist.push_back({p, r->u});
            step = std::min(real(step * 2), max_step);
        }
        return true;
    }
};

BoundaryConfig to_config(const ExponentSpec& spec, const System& sys, const vec& u, const real& eps,
                         int digits) {
    BoundaryConfig c;
    c.spec = spec;
    c.epsilon = eps;
    c.digits = digits;
    for (size_t s = 0; s < sys.var.size(); ++s)
        c.value.push_back(sys.var[s] >= 0 ? real(exp(u[sys.var[s]])) : sys.cval[s]);
    return c;
}

int resolve_digits(const ExponentSpec& spec, const SolverOptions& opt) {
    return opt.digits > 0 ? opt.digits : default_digits(spec);
}

real solver_tol(int digits) { return pow10r(real(-(digits + 3))); }

void check_spec(const ExponentSpec& spec) {
    if (spec.degree() < 1) throw error(errc::unsupported_spec, "boundary systems need degree >= 1");
}

// unknowns of the doubled system in log form, for all-positive specs
std::optional<std::pair<vec, int>> doubled_positive(const ExponentSpec& spec, const System& sys,
                                                     const real& tol, int starts) {
    int n = spec.degree();
    int g = gcd_of(spec.k);
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> jit(-0.05, 0.05);
    for (int tr = 0; tr < starts; ++tr) {
        vec u(sys.nv);
        for (int j = 0; j < sys.nv; ++j) {
            int t = n - j;
            real s = sin(t * boost::math::constants::pi<real>() / (2 * n + 2));
            u[j] = log(s * s) / g * (tr ? 1 + jit(rng) : 1.0);
        }
        if (auto r = solve_once(sys, u, tol)) return std::make_pair(r->u, tr + 1);
    }
    return std::nullopt;
}

struct DoubledState {
    System sys;
    vec u;
    real eps;
    int starts = 0;
    int steps = 0;
};

DoubledState solve_doubled(const ExponentSpec& spec, const SolverOptions& opt, int digits) {
    check_spec(spec);
    int n = spec.degree();
    real tol = solver_tol(digits);
    if (spec.all_positive()) {
        System sys = build(spec, Kind::Doubled, real(0), 0, 0);
        auto r = doubled_positive(spec, sys, tol, opt.max_starts);
        if (!r)
            throw error(errc::no_convergence, "doubled system for k=" + spec.str() + ": no start converged (" +
                                                  std::to_string(opt.max_starts) + " starts)");
        return {sys, r->first, real(0), r->second, 0};
    }
    // epsilon continuation in log10(eps)
    auto make = [&](const real& le) { return build(spec, Kind::Doubled, pow10r(le), 0, 0); };
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> jit(-0.05, 0.05);
    std::optional<std::pair<real, vec>> start;
    int starts = 0;
    for (double le0 : {-1.0, -0.5, -0.25, -2.0}) {
        real eps = pow10r(real(le0));
        System sys = make(real(le0));
        for (int tr = 0; tr < opt.max_starts && !start; ++tr) {
            ++starts;
            vec u(sys.nv);
            for (int j = 0; j < sys.nv; ++j) {
                int t = n - j;
                real s = sin(t * boost::math::constants::pi<real>() / (2 * n + 2));
                u[j] = log(eps + (1 - eps) * s * s) * (tr ? 1 + jit(rng) : 1.0);
            }
            if (auto r = solve_once(sys, u, tol)) start = std::make_pair(real(le0), r->u);
        }
        if (start) break;
    }
    if (!start)
        throw error(errc::no_convergence, "doubled system for k=" + spec.str() +
                                              ": no start converged at any initial epsilon");
    Continuation c{make, {*start}, tol, real(4)};
    if (!c.advance(real(opt.eps_exp), real(1)))
        throw error(errc::no_convergence, "epsilon continuation stalled for k=" + spec.str() + " near eps=1e" +
                                              c.hist.back().first.str(6));
    DoubledState d{make(real(opt.eps_exp)), c.hist.back().second, pow10r(real(opt.eps_exp)), starts, c.solves};
    return d;
}

// the next-configuration unknowns at beta_top = top pair of the doubled solution
vec next_from_doubled(const vec& du) {
    // doubled vars: 0 = top pair, then pairs; next vars: 0 = single b_n, then the same pairs
    return du;
}

} // namespace

int default_digits(const ExponentSpec& spec) { return spec.k.empty() || spec.all_positive() ? 80 : 120; }

std::vector<Role> interlace_order(int n) {
    std::vector<Role> out;
    int ia = n + 1, ib = n + 1;
    out.push_back({'a', ia--});
    for (int p = 1; p < 2 * n + 2; ++p) {
        int q = (p - 1) / 2;
        if (q % 2 == 0)
            out.push_back({'b', ib--});
        else
            out.push_back({'a', ia--});
    }
    return out;
}

std::vector<Role> interlace_order(const ExponentSpec& spec) { return interlace_order(spec.degree()); }

std::string role_str(const Role& r) { return std::string(1, r.side) + std::to_string(r.index); }

real BoundaryConfig::at(char side, int index) const {
    auto order = interlace_order(spec.degree());
    for (size_t s = 0; s < order.size(); ++s)
        if (order[s].side == side && order[s].index == index) return value[s];
    throw error(errc::precondition_violated, "no slot " + std::string(1, side) + std::to_string(index));
}

real BoundaryConfig::residual() const {
    precision_guard g(digits);
    auto order = interlace_order(spec.degree());
    real worst = 0;
    for (int k : spec.k) {
        real t = 0, mag = 0;
        for (size_t s = 0; s < value.size(); ++s) {
            if (value[s] == 0) continue;
            real x = k == 0 ? real(log(value[s])) : real(pow(value[s], k));
            t += order[s].side == 'a' ? x : real(-x);
            mag += abs(x);
        }
        if (mag == 0) mag = 1;
        worst = std::max(worst, real(abs(t) / mag));
    }
    return worst;
}

BoundaryConfig doubled_configuration(const ExponentSpec& spec, const SolverOptions& opt) {
    int digits = resolve_digits(spec, opt);
    precision_guard g(digits);
    auto d = solve_doubled(spec, opt, digits);
    auto c = to_config(spec, d.sys, d.u, d.eps, digits);
    c.starts = d.starts;
    c.newton_steps = d.steps;
    return c;
}

real solve_beta_top_min(const ExponentSpec& spec, int digits) {
    SolverOptions o;
    o.digits = digits;
    auto c = doubled_configuration(spec, o);
    return c.value[1];
}

namespace {

struct NextTracker {
    ExponentSpec spec;
    int digits;
    real eps, beta_min;
    Continuation cont;

    NextTracker(const ExponentSpec& s, const SolverOptions& opt, int dg) : spec(s), digits(dg) {
        auto d = solve_doubled(spec, opt, digits);
        eps = d.eps;
        beta_min = exp(d.u[0]);
        real e = eps;
        ExponentSpec sp = spec;
        cont.make = [sp, e](const real& b) { return build(sp, Kind::Next, e, b, 0); };
        cont.tol = solver_tol(digits);
        cont.max_step = real(1) / 100;
        cont.hist.push_back({beta_min, next_from_doubled(d.u)});
    }

    // first step off the symmetric point uses the mirrored guess y = 2*beta_min - beta
    bool leave_start(const real& target) {
        real step = std::min(real(target - beta_min), real(1) / 1000);
        while (step > pow10r(real(-14))) {
            real b = beta_min + step;
            vec g = cont.hist.back().second;
            g[0] = log(2 * beta_min - b);
            if (auto r = solve_once(cont.make(b), g, cont.tol)) {
                cont.hist.push_back({b, r->u});
                return true;
            }
            step /= 2;
        }
        return false;
    }

    vec solve(const real& target) {
        if (target >= 1) throw error(errc::out_of_domain, "beta_top must be < 1");
        real tolb = pow10r(real(-(digits - 5)));
        if (target < beta_min - tolb)
            throw error(errc::out_of_domain, "beta_top " + target.str(12) + " below beta_top_min " +
                                                 beta_min.str(12));
        if (target <= beta_min + tolb) return cont.hist.front().second;
        if (cont.hist.size() == 1 && !leave_start(target))
            throw error(errc::no_convergence, "cannot leave the doubled point for k=" + spec.str());
        if (cont.hist.back().first > target) {
            // restart from the closest earlier point
            while (cont.hist.size() > 2 && cont.hist.back().first > target) cont.hist.pop_back();
            if (cont.hist.back().first > target) {
                cont.hist.resize(1);
                if (!leave_start(target))
                    throw error(errc::no_convergence, "cannot leave the doubled point for k=" + spec.str());
                if (cont.hist.back().first > target) {
                    // leave_start overshoots only if target is within the first step
                    auto r = solve_once(cont.make(target), cont.hist.back().second, cont.tol);
                    if (!r) throw error(errc::no_convergence, "next system at " + target.str(12));
                    return r->u;
                }
            }
        }
        if (!cont.advance(target, real(1) / 1000))
            throw error(errc::no_convergence, "next system for k=" + spec.str() + " stalled near beta_top=" +
                                                  cont.hist.back().first.str(12));
        return cont.hist.back().second;
    }

    BoundaryConfig config(const real& target) {
        vec u = solve(target);
        auto c = to_config(spec, cont.make(std::max(target, beta_min)), u, eps, digits);
        if (target <= beta_min) {
            c.value[1] = beta_min;
            c.value[2] = beta_min;
        }
        c.newton_steps = cont.solves;
        return c;
    }
};

} // namespace

BoundaryConfig next_configuration(const ExponentSpec& spec, const real& beta_top, const SolverOptions& opt) {
    check_spec(spec);
    int digits = resolve_digits(spec, opt);
    precision_guard g(digits);
    NextTracker t(spec, opt, digits);
    real b = beta_top;
    auto c = t.config(b);
    int kn = spec.max_k();
    if (kn > 0 && c.value[2] * (1 + pow10r(real(-(digits - 5)))) < pow(1 - pow(b, kn), real(1) / kn))
        throw error(errc::no_convergence, "b_n root outside its interlacing interval");
    return c;
}

real solve_beta_next_min(const ExponentSpec& spec, const real& beta_top, int digits) {
    SolverOptions o;
    o.digits = digits;
    return next_configuration(spec, beta_top, o).value[2];
}

BoundaryConfig alpha_max_configuration(const ExponentSpec& spec, const real& beta_top, const real& beta_next,
                                       const SolverOptions& opt) {
    check_spec(spec);
    if (spec.degree() < 2) throw error(errc::unsupported_spec, "alpha bound needs degree >= 2");
    int digits = resolve_digits(spec, opt);
    precision_guard g(digits);
    NextTracker t(spec, opt, digits);
    real bt = beta_top;
    vec nu = t.solve(bt);
    real y_min = exp(nu[0]);
    real bn = beta_next;
    real tolb = pow10r(real(-(digits - 5)));
    if (bn < y_min - tolb || bn > bt + tolb)
        throw error(errc::out_of_domain, "beta_n outside [beta_n_min, beta_top]");
    real eps = t.eps;
    ExponentSpec sp = spec;
    auto make = [sp, eps, bt](const real& b) { return build(sp, Kind::AlphaMax, eps, bt, b); };
    // next vars: y, pair(a_n,a_{n-1}), rest; alpha-max vars: a_n, a_{n-1}, rest
    vec base(nu.begin() + 1, nu.end());
    base.insert(base.begin() + 1, base[0]);
    BoundaryConfig out;
    auto finish = [&](const vec& u, const real& b) {
        out = to_config(spec, make(b), u, eps, digits);
        return out;
    };
    if (bn <= y_min) return finish(base, y_min);
    Continuation c{make, {{y_min, base}}, solver_tol(digits), real(1) / 100};
    real step = std::min(real(bn - y_min), real(1) / 1000);
    bool left = false;
    while (!left && step > pow10r(real(-14))) {
        for (double mul : {1.0, 0.3, 3.0, 0.1, 10.0}) {
            real b = y_min + step;
            vec g = base;
            real d = sqrt(step) * mul;
            g[0] = base[0] + d;
            g[1] = base[1] - d;
            if (auto r = solve_once(make(b), g, c.tol)) {
                c.hist.push_back({b, r->u});
                left = true;
                break;
            }
        }
        if (!left) step /= 2;
    }
    if (!left) throw error(errc::no_convergence, "alpha system cannot leave the doubled point");
    if (c.hist.back().first < bn && !c.advance(bn, step))
        throw error(errc::no_convergence, "alpha continuation stalled");
    if (c.hist.back().first > bn) {
        auto r = solve_once(make(bn), c.hist.back().second, c.tol);
        if (!r) throw error(errc::no_convergence, "alpha system at beta_n");
        return finish(r->u, bn);
    }
    return finish(c.hist.back().second, bn);
}

std::optional<int64_t> BoundTable::entry(int key) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), std::make_pair(key, int64_t(INT64_MIN)));
    if (it == entries.end() || it->first != key) return std::nullopt;
    return it->second;
}

std::optional<int64_t> BoundTable::lookup(const bigint& num, const bigint& den) const {
    if (entries.empty()) return std::nullopt;
    // smallest grid key >= 1e4*num/den
    bigint q = 10000 * num;
    bigint r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_mpz_t(), den.get_mpz_t());
    if (r <= first_key()) return entries.front().second;
    if (r > last_key()) return std::nullopt;
    long key = r.get_si();
    auto it = std::lower_bound(entries.begin(), entries.end(), std::make_pair(int(key), int64_t(INT64_MIN)));
    return it->second;
}

std::string BoundTable::str() const {
    std::ostringstream os;
    os << "# gpte-bound-table k=" << spec.str() << " res=" << (step == 1 ? "0.0001" : "0.001") << "\n";
    for (auto& [k, v] : entries) os << "    " << k << "    " << v << "\n";
    return os.str();
}

void BoundTable::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw error(errc::io_error, "cannot write " + path);
    f << str();
    if (!f) throw error(errc::io_error, "write failed: " + path);
}

BoundTable BoundTable::parse(const std::string& text) {
    BoundTable t;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto s = trim(line);
        if (s.empty()) continue;
        if (s[0] == '#') {
            auto kpos = s.find("k=");
            if (kpos != std::string_view::npos) {
                auto rest = s.substr(kpos + 2);
                auto sp = rest.find_first_of(" \t");
                t.spec = ExponentSpec::parse(rest.substr(0, sp));
            }
            auto rpos = s.find("res=");
            if (rpos != std::string_view::npos && s.substr(rpos + 4).substr(0, 5) == "0.001" &&
                s.substr(rpos + 4).substr(0, 6) != "0.0001")
                t.step = 10;
            continue;
        }
        std::istringstream ls{std::string(s)};
        long long key, val;
        std::string extra;
        if (!(ls >> key >> val) || (ls >> extra))
            throw error(errc::parse_error, "bound table line " + std::to_string(lineno) + ": '" + line + "'");
        if (!t.entries.empty() && key <= t.entries.back().first)
            throw error(errc::parse_error, "bound table keys not ascending at line " + std::to_string(lineno));
        t.entries.push_back({int(key), val});
    }
    return t;
}

BoundTable BoundTable::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw error(errc::io_error, "cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

namespace {

int64_t floor_scaled(const real& v) {
    real s = floor(v * 1000000);
    return s.convert_to<int64_t>();
}

void table_range(const ExponentSpec& spec, const SolverOptions& opt, int digits, int step, int lo_key, int hi_key,
                 std::vector<std::pair<int, int64_t>>& out) {
    NextTracker t(spec, opt, digits);
    for (int key = lo_key; key <= hi_key; key += step) {
        real b = real(key) / 10000;
        vec u;
        try {
            u = t.solve(b);
        } catch (const error& e) {
            throw error(e.code(), std::string(e.what()) + " (grid point " + std::to_string(key) + ")");
        }
        out.push_back({key, floor_scaled(exp(u[0]))});
    }
}

} // namespace

BoundTable build_bound_table(const ExponentSpec& spec, double res, int digits, unsigned threads) {
    check_spec(spec);
    int step;
    if (std::abs(res - 1e-4) < 1e-12)
        step = 1;
    else if (std::abs(res - 1e-3) < 1e-12)
        step = 10;
    else
        throw error(errc::precondition_violated, "bound table resolution must be 0.001 or 0.0001");
    SolverOptions opt;
    opt.digits = digits;
    int dg = resolve_digits(spec, opt);
    // the mpfr default precision is process-wide, so it is set once here for all workers
    precision_guard g(dg);
    real bmin = solve_beta_top_min(spec, dg);
    int first = real(ceil(bmin * 10000 / step) * step).convert_to<int>();
    BoundTable t;
    t.spec = spec;
    t.step = step;
    int last = 10000 - step;
    if (first > last) return t;
    int count = (last - first) / step + 1;
    threads = std::max(1u, std::min<unsigned>(threads, unsigned(count)));
    std::vector<std::vector<std::pair<int, int64_t>>> parts(threads);
    std::vector<std::exception_ptr> errs(threads);
    auto work = [&](unsigned w) {
        int a = first + int(int64_t(count) * w / threads) * step;
        int b = first + int(int64_t(count) * (w + 1) / threads) * step - step;
        try {
            table_range(spec, opt, dg, step, a, b, parts[w]);
        } catch (...) {
            errs[w] = std::current_exception();
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    for (auto& p : parts) t.entries.insert(t.entries.end(), p.begin(), p.end());
    return t;
}

namespace {

bigint powz(const bigint& x, int k) {
    bigint r;
    mpz_pow_ui(r.get_mpz_t(), x.get_mpz_t(), unsigned(k));
    return r;
}

// sign that makes the partial sum of the first d slots positive
int partial_sign(const std::vector<Role>& order, size_t s, size_t d) {
    char next = order[d].side;
    return order[s].side == next ? -1 : 1;
}

} // namespace

PowerInterval conservative_interval(const ExponentSpec& spec, int k, const std::vector<bigint>& fixed) {
    if (k <= 0 || !spec.contains(k))
        throw error(errc::precondition_violated, "conservative interval needs a positive exponent of the spec");
    int n = spec.degree();
    size_t p = fixed.size();
    if (p == 0 || p >= size_t(2 * n + 2))
        throw error(errc::precondition_violated, "fixed prefix must hold 1..2n+1 values");
    auto order = interlace_order(n);
    bigint r = 0;
    for (size_t s = 0; s < p; ++s) r += partial_sign(order, s, p) * powz(fixed[s], k);
    PowerInterval iv;
    if (p == size_t(2 * n + 1)) {
        // the last element closes every sum exactly
        if (r < 0) throw error(errc::empty_interval, "negative remainder for the last element");
        iv.low = r;
        iv.high = r;
        iv.low_closed = iv.high_closed = true;
        return iv;
    }
    // the lower ends turn closed when only the last element, which may be 0, is left to absorb them
    iv.low_closed = p + 2 >= size_t(2 * n + 1);
    if (p % 2 == 1) {
        iv.low = rational(r, 2);
        iv.low.canonicalize();
        iv.high = r;
        if (r <= 0) throw error(errc::empty_interval, "non-positive remainder " + r.get_str());
    } else {
        iv.low = r;
        iv.high = powz(fixed[p - 1], k);
        iv.high_closed = true;
        if (iv.low > iv.high || (iv.low == iv.high && !iv.low_closed))
            throw error(errc::empty_interval, "remainder exceeds the paired element");
    }
    return iv;
}

bigint threshold_partial(int depth, int k, const std::vector<bigint>& prefix) {
    if (k <= 0) throw error(errc::precondition_violated, "threshold sums need k > 0");
    if (depth < 1 || size_t(depth) > prefix.size())
        throw error(errc::precondition_violated, "prefix shorter than depth");
    // the sign pattern does not depend on n as long as depth < 2n+2
    auto order = interlace_order(depth);
    bigint r = 0;
    for (int s = 0; s < depth; ++s) r += partial_sign(order, s, depth) * powz(prefix[s], k);
    return r;
}

long double threshold_ratio(const bigint& d_ki, const bigint& d_kn, int ki, int kn) {
    if (ki == kn) return 1.0L;
    auto lg = [](const bigint& x) {
        long e;
        double m = mpz_get_d_2exp(&e, x.get_mpz_t());
        return std::log((long double)m) + (long double)e * std::log(2.0L);
    };
    if (d_ki <= 0 || d_kn <= 0) return -1.0L;
    return std::exp((long double)kn * lg(d_ki) - (long double)ki * lg(d_kn));
}

const ThresholdRow* ThresholdParams::row(int depth, int ki) const {
    for (auto& r : rows)
        if (r.depth == depth && r.ki == ki) return &r;
    return nullptr;
}

int ThresholdParams::max_depth() const {
    int d = 0;
    for (auto& r : rows) d = std::max(d, r.depth);
    return d;
}

ThresholdParams threshold_params(const ExponentSpec& spec, const SolverOptions& opt) {
    if (spec.degree() < 1 || spec.max_k() <= 0)
        throw error(errc::precondition_violated, "threshold needs a positive largest exponent");
    ThresholdParams p;
    p.spec = spec;
    p.config = doubled_configuration(spec, opt);
    int n = spec.degree();
    precision_guard g(p.config.digits);
    auto order = interlace_order(n);
    for (size_t s = 1; s + 1 < order.size(); s += 2) {
        if (order[s].side == 'b')
            p.beta.push_back(p.config.value[s]);
        else
            p.alpha.push_back(p.config.value[s]);
    }
    int kn = spec.max_k();
    int slots = 2 * n + 2;
    for (int d = 3; d <= std::min(n + 2, slots - 1); ++d) {
        auto dsum = [&](int k) {
            real r = 0;
            for (int s = 0; s < d; ++s) {
                real v = p.config.value[s];
                if (v == 0) continue;
                r += partial_sign(order, s, d) * pow(v, k);
            }
            return r;
        };
        real dn = dsum(kn);
        if (dn <= 0) continue;
        for (int ki : spec.k) {
            if (ki <= 0 || ki >= kn) continue;
            real di = dsum(ki);
            if (di <= 0) continue;
            ThresholdRow r;
            r.depth = d;
            r.ki = ki;
            r.lower = d % 2 == 1 ? 1 : 0;
            r.ceiling = pow(di, kn) / pow(dn, ki);
            r.ceiling_ld = r.ceiling.convert_to<long double>();
            p.rows.push_back(r);
        }
    }
    return p;
}

bool threshold_check_depth(const ThresholdParams& p, int depth, const std::vector<bigint>& partial) {
    int kn = p.spec.max_k();
    const bigint* dn = nullptr;
    for (size_t i = 0; i < p.spec.k.size(); ++i)
        if (p.spec.k[i] == kn) dn = &partial[i];
    for (auto& r : p.rows) {
        if (r.depth != depth) continue;
        size_t i = 0;
        while (p.spec.k[i] != r.ki) ++i;
        long double q = threshold_ratio(partial[i], *dn, r.ki, kn);
        if (!(q > r.lower)) return false;
        if (q > r.ceiling_ld * (1 + 1e-12L)) return false;
    }
    return true;
}

bool threshold_check(const ThresholdParams& p, const std::vector<bigint>& prefix) {
    for (int d = 3; d <= std::min<int>(p.max_depth(), int(prefix.size())); ++d) {
        std::vector<bigint> partial;
        for (int k : p.spec.k) partial.push_back(k > 0 ? threshold_partial(d, k, prefix) : bigint(0));
        if (!threshold_check_depth(p, d, partial)) return false;
    }
    return true;
}

} // namespace gpte
