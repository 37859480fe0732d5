#include "debtlab/sim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <thread>

#include "debtlab/percentile.hpp"
#include "debtlab/rng.hpp"

namespace debtlab {

ShockDistribution estimate_distribution(const HistoryData& history) {
    const auto& years = history.macro.years;
    const size_t n = years.size();
    if (n < 2)
        throw ValidationError("shock distribution estimation needs at least two history years");

    // Column order: growth, interest, inflation, primary balance.
    auto value = [](const MacroYear& y, int ch) {
        switch (ch) {
            case 0: return y.g;
            case 1: return y.i;
            case 2: return y.pi;
            default: return y.pb;
        }
    };

    ShockDistribution dist;
    for (int c = 0; c < 4; ++c) {
        double sum = 0.0;
        for (const auto& y : years) sum += value(y, c);
        dist.mean[c] = sum / static_cast<double>(n);
    }
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            double sum = 0.0;
            for (const auto& y : years)
                sum += (value(y, a) - dist.mean[a]) * (value(y, b) - dist.mean[b]);
            dist.covariance[a][b] = sum / static_cast<double>(n - 1);
        }
    }
    return dist;
}

namespace {

// Symmetric PSD square root; negative eigenvalues from rounding are clipped.
Eigen::Matrix4d matrix_sqrt(const ShockDistribution& dist, double sigma_scale) {
    Eigen::Matrix4d S;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) S(a, b) = dist.covariance[a][b] * sigma_scale;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(S);
    if (es.info() != Eigen::Success)
        throw ComputationError("shock covariance eigendecomposition failed");
    Eigen::Vector4d w = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * w.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

FanChart simulate_fan(const MacroAssumptions& baseline, double d0,
                      const ShockDistribution& dist, const FanSettings& settings,
                      const std::string& calibration_digest, int threads) {
    const int ny = static_cast<int>(baseline.years.size());
    if (ny == 0) throw ValidationError("fan simulation needs a projection horizon");
    if (settings.iterations < 1) throw ValidationError("fan simulation needs iterations >= 1");

    const Eigen::Matrix4d A = matrix_sqrt(dist, settings.sigma_scale);
    Eigen::Vector4d drift = Eigen::Vector4d::Zero();
    if (settings.centering == FanCentering::kDeclared)
        for (int c = 0; c < 4; ++c) drift(c) = settings.drift[c];

    FanChart fan;
    fan.start_year = baseline.start_year;
    fan.percentile_levels = settings.percentile_levels;
    fan.iterations = settings.iterations;
    fan.seed = settings.seed;
    fan.rng_version = rng::kVersion;
    fan.calibration_digest = calibration_digest;
    fan.centering = settings.centering;
    fan.drift = settings.drift;
    fan.sigma_scale = settings.sigma_scale;
    fan.ar1 = settings.ar1;
    fan.paths.assign(static_cast<size_t>(settings.iterations),
                     std::vector<double>(static_cast<size_t>(ny)));

    auto run_block = [&](int begin, int end) {
        for (int it = begin; it < end; ++it) {
            double d = d0;
            Eigen::Vector4d carry = Eigen::Vector4d::Zero();
            for (int t = 0; t < ny; ++t) {
                Eigen::Vector4d z;
                for (int ch = 0; ch < 4; ++ch) {
                    const double u = rng::uniform(settings.seed, rng::kStreamFan,
                                                  static_cast<std::uint64_t>(it),
                                                  (static_cast<std::uint64_t>(t) << 3) |
                                                      static_cast<std::uint64_t>(ch));
                    z(ch) = rng::normal_inverse(u);
                }
                Eigen::Vector4d e = A * z;
                if (settings.ar1 != 0.0) {
                    e += settings.ar1 * carry;
                    carry = e;
                }
                e += drift;
                const MacroYear& y = baseline.years[static_cast<size_t>(t)];
                MacroYear shocked = y;
                shocked.g += e(0);
                shocked.i += e(1);
                shocked.pi += e(2);
                shocked.pb += e(3);
                d = debt_step(d, shocked);
                fan.paths[static_cast<size_t>(it)][static_cast<size_t>(t)] = d;
            }
        }
    };

    int want = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    want = std::clamp(want, 1, settings.iterations);
    if (want == 1) {
        run_block(0, settings.iterations);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(want));
        const int chunk = (settings.iterations + want - 1) / want;
        for (int w = 0; w < want; ++w) {
            const int begin = w * chunk;
            const int end = std::min(settings.iterations, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(run_block, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    fan.bands.assign(fan.percentile_levels.size(), std::vector<double>(static_cast<size_t>(ny)));
    std::vector<double> column(static_cast<size_t>(settings.iterations));
    for (int t = 0; t < ny; ++t) {
        for (int it = 0; it < settings.iterations; ++it)
            column[static_cast<size_t>(it)] = fan.paths[static_cast<size_t>(it)][static_cast<size_t>(t)];
        for (size_t lvl = 0; lvl < fan.percentile_levels.size(); ++lvl)
            fan.bands[lvl][static_cast<size_t>(t)] = percentile(column, fan.percentile_levels[lvl]);
    }
    return fan;
}

std::vector<ThresholdSummary> band_summary(const FanChart& fan,
                                           const std::vector<double>& thresholds) {
    if (fan.paths.empty())
        throw ValidationError("threshold summary needs the simulated paths");
    const size_t ny = fan.paths.front().size();
    std::vector<ThresholdSummary> out;
    out.reserve(thresholds.size());
    for (double thr : thresholds) {
        ThresholdSummary row;
        row.threshold = thr;
        row.probability.assign(ny, 0.0);
        for (const auto& path : fan.paths)
            for (size_t t = 0; t < ny; ++t)
                if (path[t] > thr) row.probability[t] += 1.0;
        for (size_t t = 0; t < ny; ++t)
            row.probability[t] /= static_cast<double>(fan.paths.size());
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace debtlab
