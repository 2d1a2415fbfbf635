#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgp {

/// Normalized autocorrelations r_0..r_maxlag of one series.
inline std::vector<double> autocorrelation(const std::vector<double>& series, std::size_t max_lag) {
    const std::size_t n = series.size();
    if (n < 2) throw std::invalid_argument("autocorrelation: series too short");
    max_lag = std::min(max_lag, n - 1);
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : series) var += (v - mean) * (v - mean);
    std::vector<double> r(max_lag + 1, 0.0);
    if (var == 0.0) {
        r[0] = 1.0;
        return r;
    }
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) acc += (series[i] - mean) * (series[i + lag] - mean);
        r[lag] = acc / var;
    }
    return r;
}

/// Potential-scale-reduction style between-chain agreement statistic,
/// floored at one.  Chains of unequal length are truncated to the shortest.
inline double potential_scale_reduction(const std::vector<std::vector<double>>& chains,
                                        bool* truncated = nullptr) {
    if (chains.empty()) throw std::invalid_argument("psr: no chains");
    std::size_t n = chains.front().size();
    for (const auto& c : chains) n = std::min(n, c.size());
    if (truncated) {
        *truncated = false;
        for (const auto& c : chains)
            if (c.size() != n) *truncated = true;
    }
    if (n < 2) throw std::invalid_argument("psr: chains too short");

    // single chain: split in halves
    std::vector<std::vector<double>> parts;
    if (chains.size() == 1) {
        const auto& c = chains.front();
        parts.push_back({c.begin(), c.begin() + static_cast<long>(n / 2)});
        parts.push_back({c.begin() + static_cast<long>(n / 2), c.begin() + static_cast<long>(n)});
        n = n / 2;
    } else {
        for (const auto& c : chains) parts.push_back({c.begin(), c.begin() + static_cast<long>(n)});
    }

    const double m = static_cast<double>(parts.size());
    const double dn = static_cast<double>(n);
    std::vector<double> means;
    double w = 0.0;
    for (const auto& p : parts) {
        double mu = 0.0;
        for (double v : p) mu += v;
        mu /= dn;
        means.push_back(mu);
        double s2 = 0.0;
        for (double v : p) s2 += (v - mu) * (v - mu);
        w += s2 / (dn - 1.0);
    }
    w /= m;
    double grand = 0.0;
    for (double mu : means) grand += mu;
    grand /= m;
    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= dn / (m - 1.0);
    if (w <= 0.0) return 1.0;
    const double var_plus = (dn - 1.0) / dn * w + b / dn;
    return std::sqrt(std::max(1.0, var_plus / w));
}

struct ParameterDiagnostics {
    std::string name;
    std::vector<std::vector<double>> traces;  // per chain
    std::vector<double> autocorr;             // pooled first chain, lags 0..K
    double rhat = 1.0;
    bool flagged = false;                     // rhat > 1.1
};

struct DiagnosticsReport {
    std::vector<ParameterDiagnostics> params;
    bool chains_truncated = false;

    std::vector<std::string> flagged_names() const {
        std::vector<std::string> out;
        for (const auto& p : params)
            if (p.flagged) out.push_back(p.name);
        return out;
    }
};

/// Traces, autocorrelations (lags up to 100) and cross-chain agreement for a
/// set of named parameter series.
inline DiagnosticsReport diagnostics(const std::vector<std::string>& names,
                                     const std::vector<std::vector<std::vector<double>>>& chains_by_param,
                                     std::size_t max_lag = 100) {
    if (names.size() != chains_by_param.size())
        throw std::invalid_argument("diagnostics: name/series count mismatch");
    DiagnosticsReport rep;
    for (std::size_t p = 0; p < names.size(); ++p) {
        ParameterDiagnostics pd;
        pd.name = names[p];
        pd.traces = chains_by_param[p];
        bool trunc = false;
        pd.rhat = potential_scale_reduction(pd.traces, &trunc);
        rep.chains_truncated = rep.chains_truncated || trunc;
        pd.autocorr = autocorrelation(pd.traces.front(), max_lag);
        pd.flagged = pd.rhat > 1.1;
        rep.params.push_back(std::move(pd));
    }
    return rep;
}

}  // namespace fgp
