#include "fbsde/error.hpp"
#include "fbsde/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fbsde {

namespace {

// u(t,x) = sin(x + t) e^{-t}, shared by "trig" and "gbm".
ManufacturedParts sine_decay(CouplingFn g) {
    return {
        [](double t, double x) { return std::sin(x + t) * std::exp(-t); },
        [](double t, double x) { return (std::cos(x + t) - std::sin(x + t)) * std::exp(-t); },
        [](double t, double x) { return std::cos(x + t) * std::exp(-t); },
        [](double t, double x) { return -std::sin(x + t) * std::exp(-t); },
        std::move(g),
    };
}

CouplingFn trig_coupling(double a, double c) {
    return [a, c](double y, double z) { return a * std::sin(y) + c * std::cos(z); };
}

class Params {
public:
    Params(const CatalogEntry& entry, const ParamMap& overrides) : values_(entry.defaults) {
        for (const auto& [key, value] : overrides) {
            if (!values_.contains(key)) {
                std::ostringstream msg;
                msg << "unknown parameter '" << key << "' for problem '" << entry.id
                    << "'; valid:";
                for (const auto& [k, v] : entry.defaults) msg << ' ' << k;
                throw ModelError(msg.str());
            }
            values_[key] = value;
        }
    }
    double operator[](const std::string& key) const { return values_.at(key); }

private:
    ParamMap values_;
};

Problem make_trig(const Params& p, const CatalogOptions& opt) {
    const double b0 = p["b0"], s0 = p["s0"], eps = p["eps"], w = p["w"];
    const double eta = p["eta"], c = p["c"], d = p["d"];
    if (!(s0 > 0.0) || !(std::abs(eps) < 1.0)) {
        throw ModelError("trig needs s0 > 0 and |eps| < 1 for ellipticity");
    }
    // sigma = s0 / psi', psi(x) = x + (eps/w) sin(wx), so psi' sigma = s0 and Z
    // is flat up to the eta part.
    // u(t,x) = e^{-dt} (psi(x) + eta sin(x + ct))
    ManufacturedParts parts{
        [=](double t, double x) {
            return std::exp(-d * t) * (x + eps / w * std::sin(w * x) + eta * std::sin(x + c * t));
        },
        [=](double t, double x) {
            const double u = x + eps / w * std::sin(w * x) + eta * std::sin(x + c * t);
            return std::exp(-d * t) * (-d * u + eta * c * std::cos(x + c * t));
        },
        [=](double t, double x) {
            return std::exp(-d * t) * (1.0 + eps * std::cos(w * x) + eta * std::cos(x + c * t));
        },
        [=](double t, double x) {
            return std::exp(-d * t) * (-eps * w * std::sin(w * x) - eta * std::sin(x + c * t));
        },
        trig_coupling(p["ga"], p["gc"]),
    };
    ManufacturedOptions mo{"trig", std::nullopt, opt.width_sigmas};
    return make_manufactured(
        std::move(parts), [b0](double, double) { return b0; },
        [=](double, double x) { return s0 / (1.0 + eps * std::cos(w * x)); },
        [=](double, double x) {
            const double q = 1.0 + eps * std::cos(w * x);
            return s0 * eps * w * std::sin(w * x) / (q * q);
        },
        p["T"], p["x0"], mo);
}

Problem make_const_sigma(const Params& p, const CatalogOptions& opt) {
    const double s = p["s"], b1 = p["b1"];
    // u(t,x) = cos(x) e^{-t/2}
    ManufacturedParts parts{
        [](double t, double x) { return std::cos(x) * std::exp(-0.5 * t); },
        [](double t, double x) { return -0.5 * std::cos(x) * std::exp(-0.5 * t); },
        [](double t, double x) { return -std::sin(x) * std::exp(-0.5 * t); },
        [](double t, double x) { return -std::cos(x) * std::exp(-0.5 * t); },
        trig_coupling(p["ga"], p["gc"]),
    };
    ManufacturedOptions mo{"const-sigma", std::nullopt, opt.width_sigmas};
    return make_manufactured(
        std::move(parts), [b1](double, double x) { return b1 * std::sin(x); },
        [s](double, double) { return s; }, [](double, double) { return 0.0; }, p["T"],
        p["x0"], mo);
}

Problem make_gbm(const Params& p, const CatalogOptions& opt) {
    const double mu = p["mu"], s = p["s"], T = p["T"], x0 = p["x0"];
    if (!(x0 > 0.0)) throw ModelError("gbm requires x0 > 0");
    // Lognormal quantile band: the additive rule is circular for sigma = s x.
    const double half = opt.width_sigmas * s * std::sqrt(T) + std::abs(mu - 0.5 * s * s) * T;
    ManufacturedOptions mo{"gbm", Domain{x0 * std::exp(-half), x0 * std::exp(half)},
                           opt.width_sigmas};
    Problem prob = make_manufactured(
        sine_decay(trig_coupling(p["ga"], p["gc"])), [mu](double, double x) { return mu * x; },
        [s](double, double x) { return s * x; }, [s](double, double) { return s; }, T, x0, mo);
    attach_exact_transition(prob, {ExactTransition::GeometricBm, mu, s});
    return prob;
}

Problem make_abm_linear(const Params& p, const CatalogOptions& opt) {
    const double mu = p["mu"], s = p["s"];
    ManufacturedParts parts{
        [](double, double x) { return x; },
        [](double, double) { return 0.0; },
        [](double, double) { return 1.0; },
        [](double, double) { return 0.0; },
        [](double, double) { return 0.0; },
    };
    ManufacturedOptions mo{"abm-linear", std::nullopt, opt.width_sigmas};
    Problem prob = make_manufactured(
        std::move(parts), [mu](double, double) { return mu; }, [s](double, double) { return s; },
        [](double, double) { return 0.0; }, p["T"], p["x0"], mo);
    attach_exact_transition(prob, {ExactTransition::ArithmeticBm, mu, s});
    return prob;
}

Problem make_discount(const Params& p, const CatalogOptions& opt) {
    const double r = p["r"], s = p["s"], T = p["T"];
    // u(t,x) = e^{-r(T-t)} with g(y,z) = -r y gives f(t,x,y,z) = -r y exactly.
    ManufacturedParts parts{
        [r, T](double t, double) { return std::exp(-r * (T - t)); },
        [r, T](double t, double) { return r * std::exp(-r * (T - t)); },
        [](double, double) { return 0.0; },
        [](double, double) { return 0.0; },
        [r](double y, double) { return -r * y; },
    };
    ManufacturedOptions mo{"discount", std::nullopt, opt.width_sigmas};
    Problem prob = make_manufactured(
        std::move(parts), [](double, double) { return 0.0; }, [s](double, double) { return s; },
        [](double, double) { return 0.0; }, T, p["x0"], mo);
    prob.coefficients.f = [r](double, double, double y, double) { return -r * y; };
    prob.coefficients.phi = [](double) { return 1.0; };
    attach_exact_transition(prob, {ExactTransition::ArithmeticBm, 0.0, s});
    return prob;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries{
        {"trig",
         "u = e^-dt (x + eps/w sin wx + eta sin(x+ct)), b constant, sigma = s0/(1 + eps cos wx), "
         "g = ga sin y + gc cos z",
         "bounded smooth coefficients, uniformly elliptic: smoothness hypotheses hold",
         {{"b0", 0.05}, {"s0", 0.2}, {"eps", 0.7}, {"w", 2.0}, {"eta", 0.1}, {"c", 0.2}, {"d", 0.1},
          {"ga", 0.4}, {"gc", 0.3}, {"T", 1.0}, {"x0", 0.8}}},
        {"const-sigma",
         "u = cos(x)e^-t/2, b = b1 sin x, constant sigma (Euler coincides with Milstein)",
         "bounded smooth coefficients, constant diffusion: hypotheses hold",
         {{"b1", 0.3}, {"s", 0.4}, {"ga", 0.4}, {"gc", 0.3}, {"T", 1.0}, {"x0", 0.0}}},
        {"gbm",
         "geometric Brownian motion b = mu x, sigma = s x, u = sin(x+t)e^-t, exact transition",
         "unbounded coefficients: violates boundedness; rate checks are advisory",
         {{"mu", 0.05}, {"s", 0.2}, {"ga", 0.4}, {"gc", 0.3}, {"T", 1.0}, {"x0", 1.0}}},
        {"abm-linear",
         "arithmetic Brownian motion, u = x, g = 0 (f = -mu, zero for the default mu = 0)",
         "constant coefficients; Phi(x) = x is unbounded but linear",
         {{"mu", 0.0}, {"s", 0.4}, {"T", 1.0}, {"x0", 1.0}}},
        {"discount",
         "f = -r y, Phi = 1, Y_t = exp(-r(T-t)), x-independent",
         "hypotheses hold trivially",
         {{"r", 0.1}, {"s", 0.3}, {"T", 1.0}, {"x0", 0.0}}},
    };
    return entries;
}

Problem builtin(std::string_view id, const CatalogOptions& options) {
    const auto& entries = catalog();
    const auto it = std::find_if(entries.begin(), entries.end(),
                                 [&](const CatalogEntry& e) { return e.id == id; });
    if (it == entries.end()) {
        std::ostringstream msg;
        msg << "unknown problem '" << id << "'; valid ids:";
        for (const auto& e : entries) msg << ' ' << e.id;
        throw ModelError(msg.str());
    }
    const Params params(*it, options.params);
    Problem p;
    if (id == "trig") p = make_trig(params, options);
    else if (id == "const-sigma") p = make_const_sigma(params, options);
    else if (id == "gbm") p = make_gbm(params, options);
    else if (id == "abm-linear") p = make_abm_linear(params, options);
    else p = make_discount(params, options);
    p.summary = it->summary;
    p.hypotheses = it->hypotheses;
    return p;
}

}  // namespace fbsde
