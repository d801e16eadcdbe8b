#include "invmc/processes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "invmc/error.hpp"
#include "invmc/parallel.hpp"

namespace invmc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
    if (std::isinf(z)) return 0.0;
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

int chain_index(const FiniteChain& chain, double x) {
    for (std::size_t s = 0; s < chain.states.size(); ++s) {
        if (std::abs(chain.states[s] - x) <= 1e-12 * std::max(1.0, std::abs(x))) return static_cast<int>(s);
    }
    throw std::invalid_argument("finite chain: value " + std::to_string(x) + " is not a chain state");
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string("process parameter not finite: ") + what);
}

void validate_component(const ProcessComponent& c) {
    std::visit(Overloaded{
                   [](const Ar1Euler& p) {
                       require_finite(p.alpha, "alpha");
                       require_finite(p.mu, "mu");
                       require_finite(p.sigma, "sigma");
                       if (p.sigma < 0) throw std::invalid_argument("Ar1Euler sigma must be >= 0");
                   },
                   [](const JumpPrice& p) {
                       require_finite(p.rate, "rate");
                       require_finite(p.level, "level");
                       require_finite(p.vol, "vol");
                       require_finite(p.jump_sd, "jump_sd");
                       if (!(p.jump_prob >= 0.0 && p.jump_prob <= 1.0)) {
                           throw std::invalid_argument("jump probability must lie in [0, 1]");
                       }
                       if (p.vol < 0 || p.jump_sd < 0) throw std::invalid_argument("JumpPrice scales must be >= 0");
                   },
                   [](const SquaredAr1Wind& p) {
                       require_finite(p.coef, "coef");
                       require_finite(p.noise, "noise");
                       require_finite(p.offset, "offset");
                       if (p.noise < 0) throw std::invalid_argument("wind noise must be >= 0");
                   },
                   [](const SeasonalAr1Temp& p) {
                       require_finite(p.coef, "coef");
                       require_finite(p.noise, "noise");
                       if (p.noise < 0) throw std::invalid_argument("temperature noise must be >= 0");
                   },
                   [](const FiniteChain& p) {
                       const std::size_t s = p.states.size();
                       if (s == 0 || p.transition.size() != s * s) {
                           throw DimensionMismatch("finite chain transition must be S x S");
                       }
                       for (std::size_t r = 0; r < s; ++r) {
                           double total = 0.0;
                           for (std::size_t k = 0; k < s; ++k) {
                               const double q = p.transition[r * s + k];
                               if (!(q >= 0.0)) throw std::invalid_argument("negative transition probability");
                               total += q;
                           }
                           if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("transition rows must sum to 1");
                       }
                   },
                   [](const CustomStep& p) {
                       if (!p.step) throw std::invalid_argument("CustomStep needs a step function");
                   },
               },
               c);
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
    return r;
}

}  // namespace

void validate(const ProcessSpec& spec) {
    if (spec.components.empty()) throw std::invalid_argument("process spec has no components");
    for (const auto& c : spec.components) validate_component(c);
}

std::vector<MixtureAtom> one_step_law(const ProcessComponent& c, int n, double x) {
    (void)n;
    return std::visit(
        Overloaded{
            [x](const Ar1Euler& p) -> std::vector<MixtureAtom> {
                return {{1.0, x + p.alpha * (p.mu - x), p.sigma}};
            },
            [x](const JumpPrice& p) -> std::vector<MixtureAtom> {
                const double mean = x + p.rate * (p.level - x);
                return {{1.0 - p.jump_prob, mean, p.vol},
                        {p.jump_prob, mean, std::sqrt(p.vol * p.vol + p.jump_sd * p.jump_sd)}};
            },
            [x](const SquaredAr1Wind& p) -> std::vector<MixtureAtom> { return {{1.0, p.coef * x, p.noise}}; },
            [x](const SeasonalAr1Temp& p) -> std::vector<MixtureAtom> { return {{1.0, p.coef * x, p.noise}}; },
            [x](const FiniteChain& p) -> std::vector<MixtureAtom> {
                const std::size_t s = p.states.size();
                const std::size_t row = static_cast<std::size_t>(chain_index(p, x));
                std::vector<MixtureAtom> atoms;
                for (std::size_t k = 0; k < s; ++k) {
                    const double q = p.transition[row * s + k];
                    if (q > 0.0) atoms.push_back({q, p.states[k], 0.0});
                }
                return atoms;
            },
            [](const CustomStep&) -> std::vector<MixtureAtom> {
                throw UnsupportedMoment("custom process components have no analytic one-step law");
            },
        },
        c);
}

void conditional_poly_moments_into(const ProcessComponent& c, int n, double x, int max_degree, double* out) {
    if (max_degree < 0) throw UnsupportedMoment("moment degree must be >= 0");
    std::fill(out, out + max_degree + 1, 0.0);
    auto add_gaussian = [&](double weight, double mean, double sd) {
        const double var = sd * sd;
        double prev2 = 1.0;
        double prev = mean;
        out[0] += weight;
        if (max_degree >= 1) out[1] += weight * mean;
        for (int j = 2; j <= max_degree; ++j) {
            const double m = mean * prev + (j - 1) * var * prev2;
            out[j] += weight * m;
            prev2 = prev;
            prev = m;
        }
    };
    if (const auto* chain = std::get_if<FiniteChain>(&c)) {
        const std::size_t s = chain->states.size();
        const auto row = static_cast<std::size_t>(chain_index(*chain, x));
        for (std::size_t k = 0; k < s; ++k) {
            const double q = chain->transition[row * s + k];
            if (q > 0.0) add_gaussian(q, chain->states[k], 0.0);
        }
        return;
    }
    for (const auto& atom : one_step_law(c, n, x)) add_gaussian(atom.weight, atom.mean, atom.sd);
}

std::vector<double> conditional_poly_moments(const ProcessComponent& c, int n, double x, int max_degree) {
    if (max_degree < 0) throw UnsupportedMoment("moment degree must be >= 0");
    std::vector<double> result(max_degree + 1, 0.0);
    conditional_poly_moments_into(c, n, x, max_degree, result.data());
    return result;
}

std::vector<std::vector<double>> conditional_poly_moments(const ProcessSpec& spec, int n, Vec x, int max_degree) {
    if (static_cast<int>(x.size()) != spec.dim()) throw DimensionMismatch("state dimension does not match process");
    std::vector<std::vector<double>> table;
    table.reserve(spec.components.size());
    for (std::size_t d = 0; d < spec.components.size(); ++d) {
        table.push_back(conditional_poly_moments(spec.components[d], n, x[d], max_degree));
    }
    return table;
}

std::vector<double> truncated_gaussian_moments(double mean, double sd, double lo, double hi, int max_degree) {
    if (!(sd > 0.0)) throw std::invalid_argument("truncated_gaussian_moments: sd must be > 0");
    if (!(lo < hi)) throw std::invalid_argument("truncated_gaussian_moments: lo must be < hi");
    const double a = (lo - mean) / sd;
    const double b = (hi - mean) / sd;
    const double pa = normal_pdf(a);
    const double pb = normal_pdf(b);
    // Standardised moments T_j = E[Z^j 1{a <= Z <= b}].
    std::vector<double> t(max_degree + 1, 0.0);
    t[0] = normal_cdf(b) - normal_cdf(a);
    if (max_degree >= 1) t[1] = pa - pb;
    double a_pow = std::isinf(a) ? 0.0 : a;  // a^{j-1}, j = 2
    double b_pow = std::isinf(b) ? 0.0 : b;
    for (int j = 2; j <= max_degree; ++j) {
        t[j] = (j - 1) * t[j - 2] + a_pow * pa - b_pow * pb;
        if (!std::isinf(a)) a_pow *= a;
        if (!std::isinf(b)) b_pow *= b;
    }
    std::vector<double> out(max_degree + 1, 0.0);
    for (int j = 0; j <= max_degree; ++j) {
        double total = 0.0;
        double sd_pow = 1.0;
        for (int k = 0; k <= j; ++k) {
            total += binomial(j, k) * std::pow(mean, j - k) * sd_pow * t[k];
            sd_pow *= sd;
        }
        out[j] = total;
    }
    return out;
}

std::vector<double> conditional_truncated_moments(const ProcessComponent& c, int n, double x, double lo, double hi,
                                                  int max_degree) {
    std::vector<double> result(max_degree + 1, 0.0);
    if (!(lo < hi)) return result;
    for (const auto& atom : one_step_law(c, n, x)) {
        if (atom.sd > 0.0) {
            const auto m = truncated_gaussian_moments(atom.mean, atom.sd, lo, hi, max_degree);
            for (int j = 0; j <= max_degree; ++j) result[j] += atom.weight * m[j];
        } else if (atom.mean >= lo && atom.mean < hi) {
            double p = 1.0;
            for (int j = 0; j <= max_degree; ++j) {
                result[j] += atom.weight * p;
                p *= atom.mean;
            }
        }
    }
    return result;
}

void sample_next(const ProcessSpec& spec, int n, Vec x, const PathStream& stream, MutVec out) {
    const auto step = static_cast<std::uint32_t>(n);
    for (std::size_t d = 0; d < spec.components.size(); ++d) {
        const auto slot = static_cast<std::uint32_t>(2 * d);
        const double xd = x[d];
        out[d] = std::visit(
            Overloaded{
                [&](const Ar1Euler& p) {
                    const double z = stream.normals(step, DrawPurpose::Exogenous, slot)[0];
                    return xd + p.alpha * (p.mu - xd) + p.sigma * z;
                },
                [&](const JumpPrice& p) {
                    const auto z = stream.normals(step, DrawPurpose::Exogenous, slot);
                    const double u = stream.uniforms(step, DrawPurpose::Exogenous, slot + 1)[0];
                    const double jump = u < p.jump_prob ? p.jump_sd * z[1] : 0.0;
                    return xd + p.rate * (p.level - xd) + p.vol * z[0] + jump;
                },
                [&](const SquaredAr1Wind& p) {
                    return p.coef * xd + p.noise * stream.normals(step, DrawPurpose::Exogenous, slot)[0];
                },
                [&](const SeasonalAr1Temp& p) {
                    return p.coef * xd + p.noise * stream.normals(step, DrawPurpose::Exogenous, slot)[0];
                },
                [&](const FiniteChain& p) {
                    const std::size_t s = p.states.size();
                    const std::size_t row = static_cast<std::size_t>(chain_index(p, xd));
                    const double u = stream.uniforms(step, DrawPurpose::Exogenous, slot)[0];
                    double cumulative = 0.0;
                    for (std::size_t k = 0; k < s; ++k) {
                        cumulative += p.transition[row * s + k];
                        if (u < cumulative) return p.states[k];
                    }
                    for (std::size_t k = s; k-- > 0;) {
                        if (p.transition[row * s + k] > 0.0) return p.states[k];
                    }
                    return p.states.back();
                },
                [&](const CustomStep& p) {
                    const double z = stream.normals(step, DrawPurpose::Exogenous, slot)[0];
                    const double u = stream.uniforms(step, DrawPurpose::Exogenous, slot + 1)[0];
                    return p.step(n, xd, z, u);
                },
            },
            spec.components[d]);
    }
}

PathSet::PathSet(int m_paths, int n_steps, int dim, std::uint64_t seed)
    : m_(m_paths), n_(n_steps), p_(dim), seed_(seed),
      values_(static_cast<std::size_t>(m_paths) * (n_steps + 1) * dim, 0.0) {
    if (m_paths < 1 || n_steps < 1 || dim < 1) throw std::invalid_argument("PathSet needs M, N, p >= 1");
}

PathSet simulate_paths(const ProcessSpec& spec, int m_paths, int n_steps, Vec x0, std::uint64_t seed) {
    validate(spec);
    if (m_paths < 1 || n_steps < 1) throw std::invalid_argument("simulate_paths needs m_paths >= 1 and n_steps >= 1");
    if (static_cast<int>(x0.size()) != spec.dim()) throw DimensionMismatch("x0 dimension does not match process");
    for (double v : x0) {
        if (!std::isfinite(v)) throw NonFiniteInput("x0 is not finite");
    }
    PathSet paths(m_paths, n_steps, spec.dim(), seed);
    parallel_for(static_cast<std::size_t>(m_paths), [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            const PathStream stream(seed, m);
            const int path = static_cast<int>(m);
            auto first = paths.state(path, 0);
            std::copy(x0.begin(), x0.end(), first.begin());
            for (int n = 0; n < n_steps; ++n) {
                sample_next(spec, n, paths.state(path, n), stream, paths.state(path, n + 1));
            }
        }
    });
    return paths;
}

double SeasonalProfile::at(int n) const {
    if (!table.empty()) return table[static_cast<std::size_t>(n) % table.size()];
    return amplitude * std::sin(2.0 * std::numbers::pi * n / period);
}

double WindPowerMap::energy(double speed) const {
    const double k = 1e-6 * cp * air_density * swept_area;
    if (variant == WindPowerVariant::AsWritten) return k * std::pow(std::max(speed, rated_speed), 3);
    return std::min(k * std::pow(std::min(speed, rated_speed), 3), rated_energy);
}

double DemandPoly::demand(double temperature) const {
    double acc = 0.0;
    for (std::size_t k = coefficients.size(); k-- > 0;) acc = acc * temperature + coefficients[k];
    return std::max(0.0, acc / divisor);
}

double stationary_mean_wind_energy(const SquaredAr1Wind& wind, const WindPowerMap& map) {
    if (!(std::abs(wind.coef) < 1.0)) throw std::invalid_argument("wind AR coefficient must satisfy |coef| < 1");
    const double sd = wind.noise / std::sqrt(1.0 - wind.coef * wind.coef);
    // Trapezoid rule on the standard normal density over [-10, 10].
    constexpr int kPoints = 20001;
    constexpr double kHalfWidth = 10.0;
    const double h = 2.0 * kHalfWidth / (kPoints - 1);
    double total = 0.0;
    for (int k = 0; k < kPoints; ++k) {
        const double z = -kHalfWidth + k * h;
        const double y = sd * z;
        const double speed = (y + wind.offset) * (y + wind.offset);
        const double w = (k == 0 || k == kPoints - 1) ? 0.5 : 1.0;
        total += w * normal_pdf(z) * map.energy(speed);
    }
    return total * h;
}

double calibrate_wind_offset(const SquaredAr1Wind& wind, const WindPowerMap& map, double target_energy) {
    auto mean_at = [&](double offset) {
        SquaredAr1Wind w = wind;
        w.offset = offset;
        return stationary_mean_wind_energy(w, map);
    };
    double lo = 0.0;
    double hi = 1.0;
    while (mean_at(hi) < target_energy) {
        hi *= 2.0;
        if (hi > 1e3) throw std::invalid_argument("wind calibration target is not attainable");
    }
    if (mean_at(lo) > target_energy) throw std::invalid_argument("wind calibration target is below the zero-offset mean");
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_at(mid) < target_energy ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace invmc
