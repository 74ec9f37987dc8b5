// Derivative-free Nelder-Mead simplex minimizer. The decomposition and
// separability searches are tiny (<= 9 variables) nonconvex problems run from
// many starts, so a plain deterministic simplex is the right tool.
#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

namespace povmkit {

struct NelderMeadOptions {
    int max_evals = 2000;
    double f_tol = 1e-10;      // stop when simplex f-spread falls below
    double initial_step = 0.5;
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int evals = 0;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0,
                                    const NelderMeadOptions& opts = {}) {
    const std::size_t n = x0.size();
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opts.initial_step;

    int evals = 0;
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        fv[i] = f(simplex[i]);
        ++evals;
    }

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };

    while (evals < opts.max_evals) {
        sort_simplex();
        if (fv[order[n]] - fv[order[0]] <= opts.f_tol) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[order[i]][k] / static_cast<double>(n);

        const std::size_t worst = order[n];
        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (centroid[k] - simplex[worst][k]);
            return p;
        };

        std::vector<double> xr = blend(alpha);
        double fr = f(xr);
        ++evals;
        if (fr < fv[order[0]]) {
            std::vector<double> xe = blend(gamma);
            double fe = f(xe);
            ++evals;
            if (fe < fr) {
                simplex[worst] = std::move(xe);
                fv[worst] = fe;
            } else {
                simplex[worst] = std::move(xr);
                fv[worst] = fr;
            }
        } else if (fr < fv[order[n - 1]]) {
            simplex[worst] = std::move(xr);
            fv[worst] = fr;
        } else {
            std::vector<double> xc = blend(fr < fv[worst] ? rho : -rho);
            double fc = f(xc);
            ++evals;
            if (fc < std::min(fr, fv[worst])) {
                simplex[worst] = std::move(xc);
                fv[worst] = fc;
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 1; i <= n; ++i) {
                    std::size_t v = order[i];
                    for (std::size_t k = 0; k < n; ++k)
                        simplex[v][k] = simplex[order[0]][k] + sigma * (simplex[v][k] - simplex[order[0]][k]);
                    fv[v] = f(simplex[v]);
                    ++evals;
                    if (evals >= opts.max_evals) break;
                }
            }
        }
    }

    sort_simplex();
    return {simplex[order[0]], fv[order[0]], evals};
}

}  // namespace povmkit
