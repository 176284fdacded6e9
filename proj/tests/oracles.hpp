#pragma once

// Reference implementations used only by the tests. None of them call into
// the library's numerical routines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

// Regularized lower incomplete gamma P(a, x): power series below a + 1,
// Lentz continued fraction for Q above.
inline double gamma_p(double a, double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 10000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-17) {
                break;
            }
        }
        return sum * std::exp(log_prefix);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) {
            break;
        }
    }
    return 1.0 - std::exp(log_prefix) * h;
}

inline double gamma_pdf_unit_mean(double m, double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    return std::exp(m * std::log(m) + (m - 1.0) * std::log(x) - m * x - std::lgamma(m));
}

// n-point Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
struct GaussLegendre {
    std::vector<double> x, w;
    explicit GaussLegendre(int n) : x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int k = 1; k <= n; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::fabs(dz) < 1e-15) {
                    break;
                }
            }
            x[static_cast<std::size_t>(i)] = z;
            w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

// Composite Gauss-Legendre over `panels` equal panels.
inline double integrate(const std::function<double(double)>& f, double lo, double hi, int panels = 200) {
    static const GaussLegendre rule(20);
    const double h = (hi - lo) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * h;
        const double mid = a + 0.5 * h;
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            sum += rule.w[i] * f(mid + 0.5 * h * rule.x[i]);
        }
    }
    return 0.5 * h * sum;
}

// LoRa payload symbol count written straight from the ceiling formula with
// integer arithmetic only.
inline long payload_symbols(int s, int h, int l, int c, int b) {
    const long num = 2L * b - s - 5L * h + 11;
    const long den = s - 2L * l;
    long q = num / den;
    if (num % den != 0 && (num > 0) == (den > 0)) {
        ++q;
    }
    return 8 + std::max(q * (c + 4), 0L);
}

// Frame length in quarter symbols: 4 * (n_pr + 4.25 + payload).
inline long frame_quarter_symbols(int s, int h, int l, int c, int npr, int b) {
    return 4L * npr + 17 + 4 * payload_symbols(s, h, l, c, b);
}

// Two-sided one-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

// 1 % critical value for large samples.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

// F_M with the explicit binomial sum sum_k F^k C(N,k) p^k (1-p)^(N-k).
inline double strongest_cdf_binomial(double below, int others, double p) {
    double sum = 0.0;
    for (int k = 0; k <= others; ++k) {
        const double log_c = std::lgamma(others + 1.0) - std::lgamma(k + 1.0) - std::lgamma(others - k + 1.0);
        const double log_mass = log_c + (k > 0 ? k * std::log(p) : 0.0) +
                                (others - k > 0 ? (others - k) * std::log1p(-p) : 0.0);
        sum += std::pow(below, k) * std::exp(log_mass);
    }
    return sum;
}

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

// Equal-distance interference outage by direct sampling: desired gain a,
// K ~ Poisson(v) (or Binomial(others, p) when `binomial_others` > 0)
// interferer gains, outage iff the strongest exceeds delta * a.
inline Estimate interference_outage_mc(double m, double v, double delta, long trials, std::uint64_t seed,
                                       int binomial_others = 0, double binomial_p = 0.0) {
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gain(m, 1.0 / m);
    std::poisson_distribution<int> poisson(v > 0 ? v : 1.0);
    std::binomial_distribution<int> binom(std::max(binomial_others, 1), binomial_p);
    long hits = 0;
    for (long t = 0; t < trials; ++t) {
        const double a = gain(rng);
        const int k = binomial_others > 0 ? binom(rng) : (v > 0 ? poisson(rng) : 0);
        double strongest = 0.0;
        for (int j = 0; j < k; ++j) {
            strongest = std::max(strongest, gain(rng));
        }
        if (k > 0 && strongest > delta * a) {
            ++hits;
        }
    }
    const double p = static_cast<double>(hits) / trials;
    return {p, std::sqrt(std::max(p * (1 - p), 1e-300) / trials)};
}

struct LoggedFrame {
    int sender;
    double start, end;
    int channel;
    double power;
    int outcome; // 0 delivered, 1 fading, 2 interference
};

// Re-derives every outcome from the log alone. Two frames on one channel
// collide when the later one starts more than `lock_s` before the earlier
// one ends. Returns the number of frames whose logged outcome disagrees.
inline std::size_t audit_frames(std::vector<LoggedFrame> frames, double lock_s, double delta, double sensitivity,
                                bool weak_frames_interfere) {
    std::sort(frames.begin(), frames.end(), [](const LoggedFrame& a, const LoggedFrame& b) {
        return a.channel != b.channel ? a.channel < b.channel : a.start < b.start;
    });
    std::size_t bad = 0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        bool jammed = false;
        auto consider = [&](const LoggedFrame& g) {
            const auto& early = (g.start < f.start) ? g : f;
            const auto& late = (g.start < f.start) ? f : g;
            if (!(late.start + lock_s < early.end)) {
                return;
            }
            const bool active = weak_frames_interfere || g.power >= sensitivity;
            if (active && g.power > delta * f.power) {
                jammed = true;
            }
        };
        // Frames are shorter than 10 s, so only nearby starts can overlap.
        for (std::size_t j = i; j-- > 0 && frames[j].channel == f.channel && f.start - frames[j].start < 10.0;) {
            consider(frames[j]);
        }
        for (std::size_t j = i + 1; j < frames.size() && frames[j].channel == f.channel && frames[j].start < f.end;
             ++j) {
            consider(frames[j]);
        }
        const int expected = f.power < sensitivity ? 1 : (jammed ? 2 : 0);
        if (expected != f.outcome) {
            ++bad;
        }
    }
    return bad;
}

} // namespace oracle
