#include "riggeo/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "riggeo/errors.hpp"
#include "riggeo/sampling.hpp"
#include "riggeo/transverse.hpp"

namespace riggeo {

const char* to_string(MetricKind k) {
    switch (k) {
    case MetricKind::ambient: return "ambient";
    case MetricKind::rigged: return "rigged";
    case MetricKind::leaf: return "leaf";
    }
    return "?";
}

const char* to_string(CausalCharacter c) {
    switch (c) {
    case CausalCharacter::timelike: return "timelike";
    case CausalCharacter::null: return "null";
    case CausalCharacter::spacelike: return "spacelike";
    }
    return "?";
}

namespace {

std::string sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << v;
    return os.str();
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) with the classic quartic dense-output interpolant.
// ---------------------------------------------------------------------------

constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kA71 = 35.0 / 384, kA73 = 500.0 / 1113, kA74 = 125.0 / 192,
                 kA75 = -2187.0 / 6784, kA76 = 11.0 / 84;
// fifth-order minus fourth-order weights (embedded error estimate)
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;
// dense-output weights
constexpr double kD1 = -12715105075.0 / 11282082432.0;
constexpr double kD3 = 87487479700.0 / 32700410799.0;
constexpr double kD4 = -10690763975.0 / 1880347072.0;
constexpr double kD5 = 701980252875.0 / 199316789632.0;
constexpr double kD6 = -1453857185.0 / 822651844.0;
constexpr double kD7 = 69997945.0 / 29380423.0;

using RhsFn = std::function<void(std::span<const double>, std::span<double>)>;
/// Index of a non-periodic position coordinate outside the chart, or -1.
using OutsideFn = std::function<int(std::span<const double>)>;
using EnergyFn = std::function<double(std::span<const double>)>;

struct OdeProblem {
    RhsFn rhs;
    OutsideFn outside;
    EnergyFn energy;
    std::vector<std::string> coord_names;  ///< for chart-exit messages
};

struct DenseStep {
    double t0 = 0.0, h = 0.0;
    std::vector<double> c0, c1, c2, c3, c4;

    std::vector<double> at(double theta) const {
        const double th1 = 1.0 - theta;
        std::vector<double> y(c0.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = c0[i] + theta * (c1[i] + th1 * (c2[i] + theta * (c3[i] + th1 * c4[i])));
        return y;
    }
};

Trajectory integrate_core(const OdeProblem& pb, MetricKind kind,
                          std::span<const double> x0, std::span<const double> v0,
                          double t0, double T, const IntegrationControl& c) {
    const int n = static_cast<int>(x0.size());
    const int dim = 2 * n;
    if (T == 0.0) throw NumericsError("geodesic integration needs a nonzero parameter length");
    const double dir = (T > 0.0) ? 1.0 : -1.0;
    const double tend = t0 + T;

    std::vector<double> y(dim);
    std::copy(x0.begin(), x0.end(), y.begin());
    std::copy(v0.begin(), v0.end(), y.begin() + n);

    Trajectory out;
    out.kind = kind;
    out.initial.position.assign(x0.begin(), x0.end());
    out.initial.velocity.assign(v0.begin(), v0.end());
    out.initial.kind = kind;
    out.initial.parameter = t0;

    const int sample_count = std::max(2, c.samples);
    std::vector<double> sample_times(sample_count);
    for (int j = 0; j < sample_count; ++j)
        sample_times[j] = t0 + T * static_cast<double>(j) / (sample_count - 1);
    std::vector<std::vector<double>> rows(sample_count);
    rows[0] = y;
    int next_row = 1;

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
    std::vector<double> ynew(dim), ytmp(dim);

    auto eval = [&](std::span<const double> yy, std::span<double> ff) {
        pb.rhs(yy, ff);
        ++out.rhs_evaluations;
    };

    eval(y, k1);
    const double q0 = pb.energy(y);

    double t = t0;
    double h = T / 100.0;
    int attempts = 0;
    bool have_exit = false;
    double exit_parameter = 0.0;
    int exit_coordinate = -1;

    while ((tend - t) * dir > 0.0) {
        if (++attempts > c.max_steps)
            throw NumericsError("geodesic integration exceeded the step budget (" +
                                std::to_string(c.max_steps) + " attempts)");
        bool clamped = false;
        if ((t + h - tend) * dir > 0.0) {
            h = tend - t;
            clamped = true;
        }
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
            throw NumericsError("geodesic integrator step size underflow at parameter " +
                                std::to_string(t));

        double err = std::numeric_limits<double>::infinity();
        bool stage_failed = false;
        try {
            for (int i = 0; i < dim; ++i) ytmp[i] = y[i] + h * kA21 * k1[i];
            eval(ytmp, k2);
            for (int i = 0; i < dim; ++i) ytmp[i] = y[i] + h * (kA31 * k1[i] + kA32 * k2[i]);
            eval(ytmp, k3);
            for (int i = 0; i < dim; ++i)
                ytmp[i] = y[i] + h * (kA41 * k1[i] + kA42 * k2[i] + kA43 * k3[i]);
            eval(ytmp, k4);
            for (int i = 0; i < dim; ++i)
                ytmp[i] = y[i] + h * (kA51 * k1[i] + kA52 * k2[i] + kA53 * k3[i] + kA54 * k4[i]);
            eval(ytmp, k5);
            for (int i = 0; i < dim; ++i)
                ytmp[i] = y[i] + h * (kA61 * k1[i] + kA62 * k2[i] + kA63 * k3[i] +
                                      kA64 * k4[i] + kA65 * k5[i]);
            eval(ytmp, k6);
            for (int i = 0; i < dim; ++i)
                ynew[i] = y[i] + h * (kA71 * k1[i] + kA73 * k3[i] + kA74 * k4[i] +
                                      kA75 * k5[i] + kA76 * k6[i]);
            eval(ynew, k7);

            double acc = 0.0;
            for (int i = 0; i < dim; ++i) {
                const double e = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] +
                                      kE6 * k6[i] + kE7 * k7[i]);
                const double sc =
                    c.abs_tol + c.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                acc += (e / sc) * (e / sc);
            }
            err = std::sqrt(acc / dim);
        } catch (const Error&) {
            // a stage left the domain of some metric expression: shrink and retry
            stage_failed = true;
        }

        if (stage_failed || err > 1.0) {
            const double fac = stage_failed ? 0.25 : std::max(0.2, 0.9 * std::pow(err, -0.2));
            h *= fac;
            continue;
        }

        // accepted: dense interpolant for this step
        DenseStep dense;
        dense.t0 = t;
        dense.h = h;
        dense.c0 = y;
        dense.c1.resize(dim);
        dense.c2.resize(dim);
        dense.c3.resize(dim);
        dense.c4.resize(dim);
        for (int i = 0; i < dim; ++i) {
            const double ydiff = ynew[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            dense.c1[i] = ydiff;
            dense.c2[i] = bspl;
            dense.c3[i] = ydiff - h * k7[i] - bspl;
            dense.c4[i] = h * (kD1 * k1[i] + kD3 * k3[i] + kD4 * k4[i] + kD5 * k5[i] +
                               kD6 * k6[i] + kD7 * k7[i]);
        }
        const double t_new = clamped ? tend : t + h;

        while (next_row < sample_count - 1 && (sample_times[next_row] - t_new) * dir <= 0.0) {
            rows[next_row] = dense.at((sample_times[next_row] - t) / h);
            ++next_row;
        }

        y = ynew;
        std::swap(k1, k7);
        ++out.steps;

        const double q = pb.energy(y);
        out.energy_drift = std::max(out.energy_drift, std::abs(q - q0));

        const int bad = pb.outside(y);
        if (bad >= 0) {
            // locate the boundary crossing on the dense interpolant
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (pb.outside(dense.at(mid)) >= 0)
                    hi = mid;
                else
                    lo = mid;
            }
            have_exit = true;
            exit_parameter = t + hi * h;
            exit_coordinate = bad;
            break;
        }

        t = t_new;
        const double fac =
            (err <= 1e-30) ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
        h *= fac;
    }

    if (have_exit) {
        const std::string name = (exit_coordinate >= 0 &&
                                  exit_coordinate < static_cast<int>(pb.coord_names.size()))
                                     ? pb.coord_names[exit_coordinate]
                                     : "?";
        throw ChartExitError("coordinate '" + name + "' left the chart at parameter " +
                                 std::to_string(exit_parameter),
                             exit_parameter, exit_coordinate);
    }

    for (int j = next_row; j < sample_count; ++j) rows[j] = y;

    out.samples.resize(sample_count);
    std::vector<double> f(dim);
    for (int j = 0; j < sample_count; ++j) {
        TrajectorySample& s = out.samples[j];
        s.t = sample_times[j];
        s.position.assign(rows[j].begin(), rows[j].begin() + n);
        s.velocity.assign(rows[j].begin() + n, rows[j].end());
        eval(rows[j], f);
        s.acceleration.assign(f.begin() + n, f.end());
    }

    out.final_state.position.assign(y.begin(), y.begin() + n);
    out.final_state.velocity.assign(y.begin() + n, y.end());
    out.final_state.kind = kind;
    out.final_state.parameter = tend;
    return out;
}

// ---------------------------------------------------------------------------
// Problem wrappers: ambient chart, induced chart (rigged), screen leaf.
// ---------------------------------------------------------------------------

int outside_coordinate(const ChartedSpacetime& M, std::span<const double> p,
                       const std::vector<int>* index_map) {
    const int count = index_map ? static_cast<int>(index_map->size()) : M.dim();
    for (int a = 0; a < count; ++a) {
        const int i = index_map ? (*index_map)[a] : a;
        if (M.period(i)) continue;
        const Interval& b = M.bounds(i);
        if (p[a] < b.lo - 1e-9 || p[a] > b.hi + 1e-9) return i;
    }
    return -1;
}

OdeProblem ambient_problem(const ChartedSpacetime& M) {
    const int n = M.dim();
    OdeProblem pb;
    pb.coord_names = M.coords();
    pb.rhs = [&M, n](std::span<const double> y, std::span<double> f) {
        const std::span<const double> pos = y.subspan(0, n);
        const std::span<const double> vel = y.subspan(n, n);
        const std::vector<double> gam = christoffel_values(M.metric_jets(pos));
        for (int i = 0; i < n; ++i) f[i] = vel[i];
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    acc += gam[(static_cast<std::size_t>(k) * n + i) * n + j] * vel[i] * vel[j];
            f[n + k] = -acc;
        }
    };
    pb.outside = [&M, n](std::span<const double> y) {
        return outside_coordinate(M, y.subspan(0, n), nullptr);
    };
    pb.energy = [&M, n](std::span<const double> y) {
        return M.inner(y.subspan(0, n), y.subspan(n, n), y.subspan(n, n));
    };
    return pb;
}

/// The induced-chart metric data the integrators need at one base point:
/// ambient coordinates as jets of the base coordinates (graph coordinate
/// solved from the level equation) plus the rigged metric and rigging form.
struct InducedData {
    std::vector<Jet3> phi;
    MetricJets rigged;
    std::vector<Jet3> omega;
};

InducedData induced_data_at(const RiggedHypersurface& hyp, std::span<const double> q,
                            double& graph_seed) {
    const ChartedSpacetime& M = hyp.ambient();
    const int n = M.dim();
    const int m = n - 1;
    const std::vector<int>& base = hyp.base_coords();
    const int gidx = hyp.graph_coord();

    std::vector<double> p(n, 0.0);
    for (int a = 0; a < m; ++a) p[base[a]] = q[a];
    p[gidx] = graph_seed;
    p = M.reduce(p);

    // value-level Newton along the graph coordinate, warm-started
    const JetSpace& line = JetSpace::get(1);
    double s = p[gidx];
    double slope = 0.0;
    bool solved = false;
    for (int it = 0; it < 40; ++it) {
        std::vector<Jet3> pj;
        pj.reserve(n);
        for (int i = 0; i < n; ++i)
            pj.push_back(i == gidx ? Jet3::variable(line, 0, s)
                                   : Jet3::constant(line, p[i]));
        const Jet3 F = hyp.level().eval_jet(pj);
        slope = F.d1(0);
        if (std::abs(F.value()) < 1e-12) {
            solved = true;
            break;
        }
        if (std::abs(slope) < 1e-12) break;
        s -= F.value() / slope;
    }
    if (!solved || std::abs(slope) < 1e-10)
        throw NumericsError("could not follow the level set along the graph coordinate "
                            "during integration");
    graph_seed = s;

    // jets of the implicit graph coordinate: chord sweeps, one order per sweep
    const JetSpace& sp = JetSpace::get(m);
    InducedData data;
    data.phi.assign(n, Jet3());
    for (int a = 0; a < m; ++a) data.phi[base[a]] = Jet3::variable(sp, a, p[base[a]]);
    data.phi[gidx] = Jet3::constant(sp, s);
    for (int sweep = 0; sweep < 3; ++sweep) {
        const Jet3 residual = hyp.level().eval_jet(data.phi);
        data.phi[gidx] = data.phi[gidx] - residual / slope;
    }
    const Jet3 residual = hyp.level().eval_jet(data.phi);
    for (int slot = 0; slot < sp.size(); ++slot)
        if (std::abs(residual.mono(slot)) > 1e-9)
            throw NumericsError("implicit chart solve lost accuracy during integration "
                                "(residual " + sci(residual.mono(slot)) + ")");

    const MetricJets along = M.metric_jets_at(data.phi);
    std::vector<std::vector<Jet3>> dphi(m);
    for (int a = 0; a < m; ++a) {
        dphi[a].reserve(n);
        for (int i = 0; i < n; ++i) dphi[a].push_back(data.phi[i].derivative(a));
    }

    const std::vector<Jet3> zeta_along = hyp.rigging().jets_at(data.phi);
    data.omega.reserve(m);
    for (int a = 0; a < m; ++a)
        data.omega.push_back(field_pairing(along, zeta_along, dphi[a]));

    data.rigged.n = m;
    data.rigged.g.assign(static_cast<std::size_t>(m) * m, Jet3());
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            Jet3 gab = field_pairing(along, dphi[a], dphi[b]) + data.omega[a] * data.omega[b];
            data.rigged.at(a, b) = gab;
            data.rigged.at(b, a) = gab;
        }
    return data;
}

/// Induced components of the rigged vector field xi at the data's base point
/// (value level): xi = grad F / dF(zeta), then keep the base rows.
std::vector<double> xi_induced_values(const RiggedHypersurface& hyp, const InducedData& data) {
    const ChartedSpacetime& M = hyp.ambient();
    const int n = M.dim();
    std::vector<double> p(n);
    for (int i = 0; i < n; ++i) p[i] = data.phi[i].value();

    const Jet3 level = hyp.level().eval_jet(M.coordinate_jets(p));
    std::vector<double> df(n);
    for (int i = 0; i < n; ++i) df[i] = level.d1(i);

    const std::vector<double> zeta = hyp.rigging().values(M, p);
    const double denom = dot(df, zeta);
    if (std::abs(denom) < 1e-10)
        throw NumericsError("rigging became tangent to the level set during integration");
    std::vector<double> grad = lu_solve(M.metric_values(p), df);

    const std::vector<int>& base = hyp.base_coords();
    std::vector<double> xi(base.size());
    for (std::size_t a = 0; a < base.size(); ++a) xi[a] = grad[base[a]] / denom;
    return xi;
}

OdeProblem induced_problem(const RiggedHypersurface& hyp, double graph_start, bool leaf) {
    const ChartedSpacetime& M = hyp.ambient();
    const int n = M.dim();
    const int m = n - 1;
    const std::vector<int>& base = hyp.base_coords();

    OdeProblem pb;
    pb.coord_names = M.coords();
    auto seed = std::make_shared<double>(graph_start);

    pb.rhs = [&hyp, seed, m, leaf](std::span<const double> y, std::span<double> f) {
        const std::span<const double> q = y.subspan(0, m);
        const std::span<const double> v = y.subspan(m, m);
        const InducedData data = induced_data_at(hyp, q, *seed);
        const std::vector<double> gam = christoffel_values(data.rigged);
        for (int a = 0; a < m; ++a) f[a] = v[a];
        std::vector<double> acc(m);
        for (int c = 0; c < m; ++c) {
            double s = 0.0;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b)
                    s += gam[(static_cast<std::size_t>(c) * m + a) * m + b] * v[a] * v[b];
            acc[c] = -s;
        }
        if (leaf) {
            // project the acceleration onto the screen: the correction along
            // xi is fixed by preserving omega(v) = 0 along the curve
            double dcontract = 0.0;
            double w_acc = 0.0;
            for (int a = 0; a < m; ++a) {
                w_acc += data.omega[a].value() * acc[a];
                for (int b = 0; b < m; ++b)
                    dcontract += data.omega[a].d1(b) * v[a] * v[b];
            }
            const std::vector<double> xi = xi_induced_values(hyp, data);
            double w_xi = 0.0;
            for (int a = 0; a < m; ++a) w_xi += data.omega[a].value() * xi[a];
            if (std::abs(w_xi) < 1e-6)
                throw NumericsError("screen projection degenerated during leaf integration");
            const double mu = (-dcontract - w_acc) / w_xi;
            for (int a = 0; a < m; ++a) acc[a] += mu * xi[a];
        }
        for (int a = 0; a < m; ++a) f[m + a] = acc[a];
    };

    pb.outside = [&hyp, &M, seed, m, base](std::span<const double> y) {
        const int bad = outside_coordinate(M, y.subspan(0, m), &base);
        if (bad >= 0) return bad;
        try {
            double s = *seed;
            (void)induced_data_at(hyp, y.subspan(0, m), s);
            const Interval& gb = M.bounds(hyp.graph_coord());
            if (s < gb.lo - 1e-9 || s > gb.hi + 1e-9) return hyp.graph_coord();
        } catch (const Error&) {
            return hyp.graph_coord();
        }
        return -1;
    };

    pb.energy = [&hyp, seed, m](std::span<const double> y) {
        const InducedData data = induced_data_at(hyp, y.subspan(0, m), *seed);
        const Mat g = data.rigged.values();
        double s = 0.0;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) s += g(a, b) * y[m + a] * y[m + b];
        return s;
    };
    return pb;
}

/// Lift an induced-chart (position, velocity, acceleration) sample to ambient
/// coordinates through the chart jets.
struct AmbientLift {
    std::vector<double> position, velocity, acceleration;
};

AmbientLift lift_to_ambient(const RiggedHypersurface& hyp, const InducedData& data,
                            std::span<const double> v, std::span<const double> acc) {
    const int n = hyp.ambient().dim();
    const int m = n - 1;
    AmbientLift lift;
    lift.position.resize(n);
    lift.velocity.assign(n, 0.0);
    lift.acceleration.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        lift.position[i] = data.phi[i].value();
        for (int a = 0; a < m; ++a) {
            lift.velocity[i] += data.phi[i].d1(a) * v[a];
            if (!acc.empty()) lift.acceleration[i] += data.phi[i].d1(a) * acc[a];
            for (int b = 0; b < m; ++b)
                lift.acceleration[i] += data.phi[i].d2(a, b) * v[a] * v[b];
        }
    }
    return lift;
}

std::vector<double> lattice_delta(const ChartedSpacetime& M, std::span<const double> a,
                                  std::span<const double> b) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        d[i] = a[i] - b[i];
        if (const auto& period = M.period(static_cast<int>(i)))
            d[i] -= *period * std::round(d[i] / *period);
    }
    return d;
}

} // namespace

Trajectory integrate(const ChartedSpacetime& M, const GeodesicState& state, double T,
                     const IntegrationControl& control) {
    if (state.kind != MetricKind::ambient)
        throw GeometryError("this chart only integrates ambient states; "
                            "rigged/leaf states need a hypersurface");
    if (static_cast<int>(state.position.size()) != M.dim() ||
        state.velocity.size() != state.position.size())
        throw GeometryError("geodesic state arity does not match the chart dimension");
    M.require_inside(state.position, "geodesic start");
    return integrate_core(ambient_problem(M), MetricKind::ambient, state.position,
                          state.velocity, state.parameter, T, control);
}

Trajectory integrate(const RiggedHypersurface& hyp, const GeodesicState& state, double T,
                     const IntegrationControl& control) {
    if (state.kind == MetricKind::ambient) return integrate(hyp.ambient(), state, T, control);
    const int m = hyp.ambient().dim() - 1;
    if (static_cast<int>(state.position.size()) != m ||
        state.velocity.size() != state.position.size())
        throw GeometryError("induced geodesic state needs the " + std::to_string(m) +
                            " base coordinates");
    const std::vector<double> p0 = hyp.solve_point(state.position);
    const OdeProblem pb =
        induced_problem(hyp, p0[hyp.graph_coord()], state.kind == MetricKind::leaf);
    return integrate_core(pb, state.kind, state.position, state.velocity, state.parameter, T,
                          control);
}

double LeafCorrespondenceResult::worst_pair() const {
    return std::max({rigged_vs_ambient, rigged_vs_leaf, ambient_vs_leaf});
}

CrossMetricResult cross_metric_residual(const RiggedHypersurface& hyp,
                                        const Trajectory& trajectory) {
    const ChartedSpacetime& M = hyp.ambient();
    const int n = M.dim();
    const int m = n - 1;
    const std::vector<int>& base = hyp.base_coords();
    CrossMetricResult res;
    double graph_seed = 0.0;
    bool seeded = false;

    for (const TrajectorySample& s : trajectory.samples) {
        AmbientLift amb;
        std::vector<double> defect;
        if (trajectory.kind == MetricKind::ambient) {
            amb.position = s.position;
            amb.velocity = s.velocity;
            amb.acceleration = s.acceleration;
            // project into the induced chart and measure the rigged defect
            std::vector<double> q(m), qd(m), qdd(m);
            for (int a = 0; a < m; ++a) {
                q[a] = s.position[base[a]];
                qd[a] = s.velocity[base[a]];
                qdd[a] = s.acceleration[base[a]];
            }
            if (!seeded) {
                graph_seed = s.position[hyp.graph_coord()];
                seeded = true;
            }
            const InducedData data = induced_data_at(hyp, q, graph_seed);
            const std::vector<double> gam = christoffel_values(data.rigged);
            defect.assign(m, 0.0);
            for (int c = 0; c < m; ++c) {
                double acc = qdd[c];
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b)
                        acc += gam[(static_cast<std::size_t>(c) * m + a) * m + b] * qd[a] * qd[b];
                defect[c] = acc;
            }
        } else {
            if (!seeded) {
                graph_seed = hyp.solve_point(trajectory.initial.position)[hyp.graph_coord()];
                seeded = true;
            }
            const InducedData data = induced_data_at(hyp, s.position, graph_seed);
            amb = lift_to_ambient(hyp, data, s.velocity, s.acceleration);
            const std::vector<double> gam = christoffel_values(M.metric_jets(amb.position));
            defect.assign(n, 0.0);
            for (int k = 0; k < n; ++k) {
                double acc = amb.acceleration[k];
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        acc += gam[(static_cast<std::size_t>(k) * n + i) * n + j] *
                               amb.velocity[i] * amb.velocity[j];
                defect[k] = acc;
            }
        }

        const double f = std::abs(hyp.level_value(amb.position));
        res.level_drift = std::max(res.level_drift, f);
        if (f > 1e-8)
            throw GeometryError("trajectory leaves the level set (|F| = " + sci(f) +
                                " at parameter " + std::to_string(s.t) + ")");

        res.defect = std::max(res.defect, norm(defect));
        const RiggedFrame fr = build_frame(hyp, hyp.refine_point(amb.position));
        res.cbar = std::max(res.cbar,
                            std::abs(extended_screen_fundamental(fr, amb.velocity,
                                                                 amb.velocity)));
    }
    return res;
}

LeafCorrespondenceResult leaf_correspondence_check(const RiggedHypersurface& hyp,
                                                   std::span<const double> base_point,
                                                   std::span<const double> leaf_velocity,
                                                   double T,
                                                   const IntegrationControl& control) {
    const ChartedSpacetime& M = hyp.ambient();
    LeafCorrespondenceResult res;

    // hypothesis residuals over seeded hypersurface samples
    for (std::uint64_t k = 1; k <= 8; ++k) {
        const std::vector<double> probe_base = halton_box(k, hyp.sampling_box());
        const RiggedFrame fr = build_frame(hyp, hyp.solve_point(probe_base));
        const auto tangents = fr.tangent_values();
        for (const auto& u : tangents)
            for (const auto& x : tangents)
                res.second_fundamental =
                    std::max(res.second_fundamental, std::abs(null_fundamental(fr, u, x)));
        for (int a = 0; a < fr.screen_count(); ++a) {
            const std::vector<double> ea = fr.values_of(fr.screen[a]);
            for (int b = a; b < fr.screen_count(); ++b) {
                const std::vector<double> eb = fr.values_of(fr.screen[b]);
                if (b > a)
                    res.frobenius = std::max(
                        res.frobenius,
                        std::abs(domega_ambient_pair(fr, fr.screen[a], fr.screen[b])));
                res.c_symmetric =
                    std::max(res.c_symmetric, 0.5 * std::abs(screen_fundamental(fr, ea, eb) +
                                                             screen_fundamental(fr, eb, ea)));
            }
        }
    }
    if (res.second_fundamental > 1e-8)
        throw GeometryError("leaf correspondence needs a totally geodesic hypersurface "
                            "(max |B| = " + sci(res.second_fundamental) + ")");
    if (res.frobenius > 1e-7)
        throw GeometryError("screen distribution is not integrable "
                            "(max |domega(E_a, E_b)| = " + sci(res.frobenius) + ")");
    if (res.c_symmetric > 1e-8)
        throw GeometryError("screen fundamental form has a symmetric part "
                            "(max |C(E_a,E_b) + C(E_b,E_a)| / 2 = " + sci(res.c_symmetric) +
                            ")");

    // identical initial data in the three charts
    const std::vector<double> p0 = hyp.solve_point(base_point);
    double seed0 = p0[hyp.graph_coord()];
    const InducedData data0 = induced_data_at(hyp, base_point, seed0);
    const AmbientLift start = lift_to_ambient(hyp, data0, leaf_velocity, {});
    {
        const RiggedFrame fr0 = build_frame(hyp, p0);
        const double w = omega_form(fr0, start.velocity);
        if (std::abs(w) > 1e-8 * std::max(1.0, norm(leaf_velocity)))
            throw GeometryError("leaf velocity is not tangent to the screen (omega(w) = " +
                                sci(w) + ")");
    }

    IntegrationControl ends = control;
    ends.samples = 2;
    GeodesicState st;
    st.position.assign(base_point.begin(), base_point.end());
    st.velocity.assign(leaf_velocity.begin(), leaf_velocity.end());

    st.kind = MetricKind::rigged;
    const Trajectory tr_rigged = integrate(hyp, st, T, ends);
    st.kind = MetricKind::leaf;
    const Trajectory tr_leaf = integrate(hyp, st, T, ends);
    GeodesicState sa;
    sa.position = start.position;
    sa.velocity = start.velocity;
    sa.kind = MetricKind::ambient;
    const Trajectory tr_ambient = integrate(M, sa, T, ends);

    auto to_ambient = [&](const Trajectory& tr) {
        double seed = hyp.solve_point(tr.final_state.position)[hyp.graph_coord()];
        const InducedData data = induced_data_at(hyp, tr.final_state.position, seed);
        return lift_to_ambient(hyp, data, tr.final_state.velocity, {});
    };
    const AmbientLift end_r = to_ambient(tr_rigged);
    const AmbientLift end_l = to_ambient(tr_leaf);

    auto pair_gap = [&](std::span<const double> pa, std::span<const double> va,
                        std::span<const double> pb, std::span<const double> vb) {
        std::vector<double> dv(va.size());
        for (std::size_t i = 0; i < va.size(); ++i) dv[i] = va[i] - vb[i];
        return norm(lattice_delta(M, pa, pb)) + norm(dv);
    };
    res.rigged_vs_ambient = pair_gap(end_r.position, end_r.velocity,
                                     tr_ambient.final_state.position,
                                     tr_ambient.final_state.velocity);
    res.rigged_vs_leaf = pair_gap(end_r.position, end_r.velocity, end_l.position,
                                  end_l.velocity);
    res.ambient_vs_leaf = pair_gap(tr_ambient.final_state.position,
                                   tr_ambient.final_state.velocity, end_l.position,
                                   end_l.velocity);
    return res;
}

// ---------------------------------------------------------------------------
// Periodic geodesic search: simplex descent, then damped least squares on the
// shooting map, then a fresh verification run.
// ---------------------------------------------------------------------------

namespace {

struct ShootingMap {
    const ChartedSpacetime* M;
    const PeriodicSearchOptions* opt;
    int n;
    double t_min;

    /// Residual vector (lattice position mismatch, velocity mismatch) of the
    /// period-T shooting map, or empty when integration fails.
    std::vector<double> residual(std::span<const double> z) const {
        GeodesicState st;
        st.position.assign(z.begin(), z.begin() + n);
        st.velocity.assign(z.begin() + n, z.begin() + 2 * n);
        const double T = z[2 * n];
        if (T < t_min) return {};
        IntegrationControl ctl = opt->control;
        ctl.samples = 2;
        try {
            const Trajectory tr = integrate(*M, st, T, ctl);
            std::vector<double> g =
                lattice_delta(*M, tr.final_state.position, st.position);
            g.resize(2 * n);
            for (int i = 0; i < n; ++i)
                g[n + i] = tr.final_state.velocity[i] - st.velocity[i];
            return g;
        } catch (const Error&) {
            return {};
        }
    }

    /// Scalar closure error: |position mismatch| + |velocity mismatch|.
    static double closure(std::span<const double> g, int n) {
        return norm(g.subspan(0, n)) + norm(g.subspan(n, n));
    }

    /// Simplex objective: closure plus smooth penalties keeping the search
    /// away from the degenerate T -> 0 and v -> 0 solutions.
    double objective(std::span<const double> z, double v_floor) const {
        const std::vector<double> g = residual(z);
        if (g.empty()) return 1e9;
        double val = closure(g, n);
        const double T = z[2 * n];
        if (T < 2.0 * t_min) val += 1e4 * (2.0 * t_min - T) * (2.0 * t_min - T);
        const double vn = norm(z.subspan(n, n));
        if (vn < v_floor) val += 1e4 * (v_floor - vn) * (v_floor - vn);
        return val;
    }
};

} // namespace

PeriodicOrbitResult find_periodic_geodesic(const ChartedSpacetime& M,
                                           const GeodesicState& guess, double period_guess,
                                           const PeriodicSearchOptions& options) {
    if (guess.kind != MetricKind::ambient)
        throw GeometryError("the periodic search runs on ambient geodesics");
    if (period_guess <= 0.0) throw GeometryError("the period guess must be positive");
    const int n = M.dim();
    const int dim = 2 * n + 1;

    ShootingMap map{&M, &options, n, 0.2 * period_guess};
    const double v_floor = 0.25 * norm(guess.velocity);

    std::vector<double> z(dim);
    std::copy(guess.position.begin(), guess.position.end(), z.begin());
    std::copy(guess.velocity.begin(), guess.velocity.end(), z.begin() + n);
    z[2 * n] = period_guess;

    PeriodicOrbitResult res;

    // --- phase 1: derivative-free simplex descent -------------------------
    std::vector<std::vector<double>> simplex(dim + 1, z);
    for (int j = 0; j < dim; ++j) {
        double step = 0.05;
        if (j >= n && j < 2 * n) step = 0.05 * std::max(1.0, std::abs(z[j]));
        if (j == 2 * n) step = 0.05 * period_guess;
        simplex[j + 1][j] += step;
    }
    std::vector<double> value(dim + 1);
    for (int j = 0; j <= dim; ++j) value[j] = map.objective(simplex[j], v_floor);

    std::vector<int> order(dim + 1);
    auto sort_simplex = [&] {
        for (int j = 0; j <= dim; ++j) order[j] = j;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return value[a] < value[b]; });
    };
    sort_simplex();
    double best_seen = value[order[0]];
    res.trace.push_back(best_seen);

    for (int it = 0; it < options.simplex_iterations; ++it) {
        sort_simplex();
        const int lo = order[0], hi = order[dim], second = order[dim - 1];
        if (value[lo] < 0.25 * options.closure_tol) break;

        std::vector<double> centroid(dim, 0.0);
        for (int j = 0; j <= dim; ++j)
            if (j != hi)
                for (int i = 0; i < dim; ++i) centroid[i] += simplex[j][i] / dim;

        auto blend = [&](double coef) {
            std::vector<double> p(dim);
            for (int i = 0; i < dim; ++i)
                p[i] = centroid[i] + coef * (simplex[hi][i] - centroid[i]);
            return p;
        };

        const std::vector<double> refl = blend(-1.0);
        const double f_refl = map.objective(refl, v_floor);
        if (f_refl < value[lo]) {
            const std::vector<double> expa = blend(-2.0);
            const double f_expa = map.objective(expa, v_floor);
            if (f_expa < f_refl) {
                simplex[hi] = expa;
                value[hi] = f_expa;
            } else {
                simplex[hi] = refl;
                value[hi] = f_refl;
            }
        } else if (f_refl < value[second]) {
            simplex[hi] = refl;
            value[hi] = f_refl;
        } else {
            const std::vector<double> contr = blend(0.5);
            const double f_contr = map.objective(contr, v_floor);
            if (f_contr < value[hi]) {
                simplex[hi] = contr;
                value[hi] = f_contr;
            } else {
                for (int j = 0; j <= dim; ++j) {
                    if (j == lo) continue;
                    for (int i = 0; i < dim; ++i)
                        simplex[j][i] = simplex[lo][i] + 0.5 * (simplex[j][i] - simplex[lo][i]);
                    value[j] = map.objective(simplex[j], v_floor);
                }
            }
        }
        sort_simplex();
        if (value[order[0]] < best_seen - 1e-16) {
            best_seen = value[order[0]];
            res.trace.push_back(best_seen);
        }
    }
    sort_simplex();
    z = simplex[order[0]];

    // --- phase 2: damped least-squares polish of the shooting map ---------
    std::vector<double> g = map.residual(z);
    double lambda = 1e-3;
    if (!g.empty()) {
        double current = ShootingMap::closure(g, n);
        res.trace.push_back(current);
        for (int it = 0; it < options.polish_iterations && current > 1e-13; ++it) {
            // forward-difference Jacobian of the residual
            Mat J(2 * n, dim);
            bool jacobian_ok = true;
            for (int j = 0; j < dim && jacobian_ok; ++j) {
                std::vector<double> zj = z;
                zj[j] += options.jacobian_step;
                const std::vector<double> gj = map.residual(zj);
                if (gj.empty()) {
                    jacobian_ok = false;
                    break;
                }
                for (int i = 0; i < 2 * n; ++i)
                    J(i, j) = (gj[i] - g[i]) / options.jacobian_step;
            }
            if (!jacobian_ok) break;

            bool stepped = false;
            for (int attempt = 0; attempt < 8 && !stepped; ++attempt) {
                Mat A(dim, dim);
                std::vector<double> b(dim, 0.0);
                for (int i = 0; i < dim; ++i) {
                    for (int j = 0; j < dim; ++j) {
                        double acc = 0.0;
                        for (int r = 0; r < 2 * n; ++r) acc += J(r, i) * J(r, j);
                        A(i, j) = acc;
                    }
                    A(i, i) += lambda * std::max(A(i, i), 1e-12);
                    for (int r = 0; r < 2 * n; ++r) b[i] -= J(r, i) * g[r];
                }
                std::vector<double> delta;
                try {
                    delta = lu_solve(A, b);
                } catch (const NumericsError&) {
                    lambda *= 10.0;
                    continue;
                }
                std::vector<double> z_new(dim);
                for (int i = 0; i < dim; ++i) z_new[i] = z[i] + delta[i];
                z_new[2 * n] = std::max(z_new[2 * n], map.t_min);
                const std::vector<double> g_new = map.residual(z_new);
                if (!g_new.empty() && ShootingMap::closure(g_new, n) < current) {
                    z = z_new;
                    g = g_new;
                    current = ShootingMap::closure(g, n);
                    res.trace.push_back(current);
                    lambda = std::max(lambda * 0.3, 1e-12);
                    stepped = true;
                } else {
                    lambda *= 10.0;
                    if (lambda > 1e10) break;
                }
            }
            if (!stepped) break;
        }
    }

    // --- report: fresh verification from the polished data ----------------
    res.initial.kind = MetricKind::ambient;
    res.initial.position = M.reduce(std::vector<double>(z.begin(), z.begin() + n));
    res.initial.velocity.assign(z.begin() + n, z.begin() + 2 * n);
    res.period = z[2 * n];

    const std::vector<double> g_final = [&] {
        std::vector<double> zz(z);
        std::copy(res.initial.position.begin(), res.initial.position.end(), zz.begin());
        return map.residual(zz);
    }();
    res.closure_error =
        g_final.empty() ? std::numeric_limits<double>::infinity()
                        : ShootingMap::closure(g_final, n);
    res.converged = res.closure_error < options.closure_tol;

    const double vn = norm(res.initial.velocity);
    double q = 0.0;
    if (vn > 0.0) {
        std::vector<double> vhat(res.initial.velocity);
        for (double& x : vhat) x /= vn;
        q = M.inner(res.initial.position, vhat, vhat);
    }
    res.character = (std::abs(q) < 1e-9) ? CausalCharacter::null
                    : (q < 0.0)          ? CausalCharacter::timelike
                                         : CausalCharacter::spacelike;
    res.matches_target =
        !options.target || !res.converged || res.character == *options.target;
    return res;
}

std::vector<PeriodicOrbitResult> hunt_periodic_geodesics(
    const ChartedSpacetime& M, std::span<const GeodesicState> guesses, double period_guess,
    const PeriodicSearchOptions& options) {
    std::vector<PeriodicOrbitResult> found;
    for (const GeodesicState& guess : guesses)
        found.push_back(find_periodic_geodesic(M, guess, period_guess, options));

    auto lex_less = [](const PeriodicOrbitResult& a, const PeriodicOrbitResult& b) {
        if (a.closure_error != b.closure_error) return a.closure_error < b.closure_error;
        if (a.initial.position != b.initial.position)
            return a.initial.position < b.initial.position;
        if (a.initial.velocity != b.initial.velocity)
            return a.initial.velocity < b.initial.velocity;
        return a.period < b.period;
    };

    std::vector<PeriodicOrbitResult> out;
    std::vector<PeriodicOrbitResult> failed;
    for (auto& r : found) (r.converged ? out : failed).push_back(std::move(r));
    std::stable_sort(out.begin(), out.end(), lex_less);
    std::stable_sort(failed.begin(), failed.end(), lex_less);

    // merge duplicate orbits: same state after lattice reduction
    std::vector<PeriodicOrbitResult> unique;
    for (auto& r : out) {
        bool duplicate = false;
        for (const auto& kept : unique) {
            const std::vector<double> dp =
                lattice_delta(M, r.initial.position, kept.initial.position);
            double dist = 0.0;
            for (double x : dp) dist = std::max(dist, std::abs(x));
            for (std::size_t i = 0; i < r.initial.velocity.size(); ++i)
                dist = std::max(dist,
                                std::abs(r.initial.velocity[i] - kept.initial.velocity[i]));
            if (dist < 1e-6) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) unique.push_back(std::move(r));
    }
    unique.insert(unique.end(), std::make_move_iterator(failed.begin()),
                  std::make_move_iterator(failed.end()));
    return unique;
}

} // namespace riggeo
