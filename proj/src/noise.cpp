#include "qsd/noise.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qsd {

namespace {

// splitmix64; the usual seed expander, here mixing (seed, stream_id) into
// one well-scrambled engine seed per stream.
std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state);
  state = mixed ^ stream_id;
  mixed = splitmix64(state);
  return splitmix64(state) ^ mixed;
}

}  // namespace

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream_id, double dt)
    : seed_(seed),
      stream_id_(stream_id),
      dt_(dt),
      sigma_(0.0),
      engine_(stream_seed(seed, stream_id)),
      unit_normal_(0.0, 1.0) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::invalid_argument,
                "noise stream needs a finite dt > 0, got " + std::to_string(dt));
  }
  sigma_ = std::sqrt(0.5 * dt);
}

ComplexIncrement NoiseStream::next() {
  const double re = sigma_ * unit_normal_(engine_);
  const double im = sigma_ * unit_normal_(engine_);
  return {re, im};
}

double NoiseStream::next_normal() { return unit_normal_(engine_); }

double MomentReport::max_sigma_deviation() const {
  const auto ratio = [](double deviation, double se) {
    return se > 0.0 ? std::abs(deviation) / se : 0.0;
  };
  double worst = ratio(mean_re, se_mean);
  worst = std::max(worst, ratio(mean_im, se_mean));
  worst = std::max(worst, ratio(mean_sq_re, se_sq));
  worst = std::max(worst, ratio(mean_sq_im, se_sq));
  worst = std::max(worst, ratio(mean_abs_sq - dt, se_abs_sq));
  worst = std::max(worst, ratio(cross_corr_re, se_cross));
  worst = std::max(worst, ratio(cross_corr_im, se_cross));
  return worst;
}

MomentReport moment_report(std::uint64_t seed, int stream_count,
                           long draws_per_stream, double dt) {
  if (stream_count < 2) {
    throw Error(ErrorKind::invalid_argument,
                "moment report needs at least 2 streams for the cross check");
  }
  if (draws_per_stream < 2) {
    throw Error(ErrorKind::invalid_argument,
                "moment report needs at least 2 draws per stream");
  }

  MomentReport report;
  report.seed = seed;
  report.stream_count = stream_count;
  report.draws_per_stream = draws_per_stream;
  report.dt = dt;

  const double total = static_cast<double>(stream_count) *
                       static_cast<double>(draws_per_stream);

  // Accumulate sums and sums of squares for each checked statistic.
  double s_re = 0, s_im = 0, ss_re = 0, ss_im = 0;
  double s_sq_re = 0, s_sq_im = 0, ss_sq_re = 0, ss_sq_im = 0;
  double s_abs = 0, ss_abs = 0;
  // Paired products between streams 0 and 1 for the correlation estimate.
  double s_xy_re = 0, ss_xy_re = 0, s_xy_im = 0, ss_xy_im = 0;
  double var0_re = 0, var1_re = 0, var0_im = 0, var1_im = 0;

  std::vector<double> first_re, first_im;
  first_re.reserve(static_cast<std::size_t>(draws_per_stream));
  first_im.reserve(static_cast<std::size_t>(draws_per_stream));

  for (int s = 0; s < stream_count; ++s) {
    NoiseStream stream(seed, static_cast<std::uint64_t>(s), dt);
    for (long k = 0; k < draws_per_stream; ++k) {
      const ComplexIncrement d = stream.next();
      s_re += d.re;
      s_im += d.im;
      ss_re += d.re * d.re;
      ss_im += d.im * d.im;
      const double sq_re = d.re * d.re - d.im * d.im;
      const double sq_im = 2.0 * d.re * d.im;
      s_sq_re += sq_re;
      s_sq_im += sq_im;
      ss_sq_re += sq_re * sq_re;
      ss_sq_im += sq_im * sq_im;
      const double abs_sq = d.re * d.re + d.im * d.im;
      s_abs += abs_sq;
      ss_abs += abs_sq * abs_sq;
      if (s == 0) {
        first_re.push_back(d.re);
        first_im.push_back(d.im);
      } else if (s == 1) {
        const double x_re = first_re[static_cast<std::size_t>(k)];
        const double x_im = first_im[static_cast<std::size_t>(k)];
        s_xy_re += x_re * d.re;
        ss_xy_re += (x_re * d.re) * (x_re * d.re);
        s_xy_im += x_im * d.im;
        ss_xy_im += (x_im * d.im) * (x_im * d.im);
        var0_re += x_re * x_re;
        var1_re += d.re * d.re;
        var0_im += x_im * x_im;
        var1_im += d.im * d.im;
      }
    }
  }

  const auto sample_se = [](double sum, double sum_sq, double n) {
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return std::sqrt(var / n);
  };

  report.mean_re = s_re / total;
  report.mean_im = s_im / total;
  report.se_mean = std::max(sample_se(s_re, ss_re, total),
                            sample_se(s_im, ss_im, total));
  report.mean_sq_re = s_sq_re / total;
  report.mean_sq_im = s_sq_im / total;
  report.se_sq = std::max(sample_se(s_sq_re, ss_sq_re, total),
                          sample_se(s_sq_im, ss_sq_im, total));
  report.mean_abs_sq = s_abs / total;
  report.se_abs_sq = sample_se(s_abs, ss_abs, total);

  const double n_pairs = static_cast<double>(draws_per_stream);
  const double denom_re =
      std::sqrt((var0_re / n_pairs) * (var1_re / n_pairs));
  const double denom_im =
      std::sqrt((var0_im / n_pairs) * (var1_im / n_pairs));
  report.cross_corr_re = denom_re > 0 ? (s_xy_re / n_pairs) / denom_re : 0.0;
  report.cross_corr_im = denom_im > 0 ? (s_xy_im / n_pairs) / denom_im : 0.0;
  // Under independence the sample correlation of n pairs has se ~ 1/sqrt(n).
  report.se_cross = 1.0 / std::sqrt(n_pairs);

  return report;
}

}  // namespace qsd
