#include "secagg/audit.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <limits>
#include <ostream>

#include "secagg/error.hpp"
#include "secagg/kernels.hpp"
#include "secagg/rng.hpp"
#include "secagg/wire.hpp"

namespace secagg {

namespace {

constexpr std::int64_t kBlock = 4096;

// Splits `samples` into fixed-size blocks, each with its own substream, and
// sums the per-block counts in block order.
template <std::size_t N, class Fn>
std::array<std::int64_t, N> count_in_blocks(std::int64_t samples, std::uint64_t seed, Fn&& block_fn) {
  const auto blocks = static_cast<std::size_t>((samples + kBlock - 1) / kBlock);
  std::vector<std::array<std::int64_t, N>> counts(blocks);
  kernels::for_each_index(blocks, [&](std::size_t b) {
    const std::int64_t begin = static_cast<std::int64_t>(b) * kBlock;
    const std::int64_t len = std::min(kBlock, samples - begin);
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
    counts[b] = block_fn(rng, len);
  });
  std::array<std::int64_t, N> total{};
  for (const auto& c : counts) {
    for (std::size_t i = 0; i < N; ++i) total[i] += c[i];
  }
  return total;
}

}  // namespace

bool BinomialEstimate::at_most(double bound, double sigmas) const noexcept {
  return rate <= bound + sigmas * standard_error;
}

bool BinomialEstimate::at_least(double bound, double sigmas) const noexcept {
  return rate >= bound - sigmas * standard_error;
}

BinomialEstimate binomial_estimate(std::int64_t events, std::int64_t trials) {
  require(trials > 0 && events >= 0 && events <= trials, ErrorCode::invalid_parameter,
          "binomial estimate needs 0 <= events <= trials, trials > 0");
  BinomialEstimate e;
  e.events = events;
  e.trials = trials;
  e.rate = static_cast<double>(events) / static_cast<double>(trials);
  e.standard_error = std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(trials));
  e.ci_low = std::max(0.0, e.rate - 1.96 * e.standard_error);
  e.ci_high = std::min(1.0, e.rate + 1.96 * e.standard_error);
  return e;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorCode::invalid_parameter, "KS needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == t) ++i;
    while (j < b.size() && b[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  require(!sample.empty(), ErrorCode::invalid_parameter, "KS needs a non-empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  require(n > 0 && m > 0 && alpha > 0 && alpha < 1, ErrorCode::invalid_parameter,
          "KS critical value needs n, m > 0 and alpha in (0, 1)");
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

double ks_critical_value(std::size_t n, double alpha) {
  require(n > 0 && alpha > 0 && alpha < 1, ErrorCode::invalid_parameter,
          "KS critical value needs n > 0 and alpha in (0, 1)");
  return std::sqrt(-0.5 * std::log(alpha / 2.0) / static_cast<double>(n));
}

double ClosenessReport::max_statistic() const noexcept {
  return statistics.empty() ? 0.0 : *std::max_element(statistics.begin(), statistics.end());
}

ClosenessReport two_sample_closeness(const ViewSampler& p, const ViewSampler& q, std::size_t samples,
                                     std::uint64_t seed, Coupling coupling, double alpha,
                                     std::string p_label, std::string q_label) {
  require(samples >= 2, ErrorCode::invalid_parameter, "closeness test needs >= 2 samples");
  std::vector<std::vector<double>> pv(samples);
  std::vector<std::vector<double>> qv(samples);
  kernels::for_each_index(samples, [&](std::size_t s) {
    const auto index = static_cast<std::uint64_t>(s);
    const std::uint64_t p_seed = derive_seed(seed, {0, index});
    const std::uint64_t q_seed = coupling == Coupling::common ? p_seed : derive_seed(seed, {1, index});
    pv[s] = p(p_seed);
    qv[s] = q(q_seed);
  });

  const std::size_t marginals = pv.front().size();
  for (std::size_t s = 0; s < samples; ++s) {
    require(pv[s].size() == marginals && qv[s].size() == marginals, ErrorCode::shape_mismatch,
            "views differ in length");
  }

  ClosenessReport r;
  r.p_label = std::move(p_label);
  r.q_label = std::move(q_label);
  r.alpha = alpha;
  r.samples = samples;
  r.statistics.resize(marginals);
  r.threshold = ks_critical_value(samples, samples, alpha / static_cast<double>(std::max<std::size_t>(marginals, 1)));
  kernels::for_each_index(marginals, [&](std::size_t m) {
    std::vector<double> a(samples);
    std::vector<double> b(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      a[s] = pv[s][m];
      b[s] = qv[s][m];
    }
    r.statistics[m] = ks_statistic(std::move(a), std::move(b));
  });
  r.consistent = std::none_of(r.statistics.begin(), r.statistics.end(),
                              [&](double d) { return d > r.threshold; });
  return r;
}

std::vector<double> flatten_view(std::span<const Message> view) {
  std::vector<double> out;
  auto append = [&](const RealVector& v) { out.insert(out.end(), v.values().begin(), v.values().end()); };
  for (const Message& m : view) {
    switch (m.kind) {
      case MessageKind::share: {
        const wire::SharePayload s = wire::decode_share(m.payload);
        append(s.share);
        break;
      }
      case MessageKind::matrix: {
        const ProjectionMatrix W = wire::decode_matrix(m.payload, ProjectionProvenance::shared_randomness);
        out.insert(out.end(), W.entries().begin(), W.entries().end());
        break;
      }
      case MessageKind::reply:
        for (const auto& [id, y] : wire::decode_replies(m.payload)) append(y);
        break;
      case MessageKind::accept_bit:
        out.push_back(wire::decode_accept(m.payload).second ? 1.0 : 0.0);
        break;
      case MessageKind::accepted_set:
        out.push_back(static_cast<double>(wire::decode_id_set(m.payload).size()));
        break;
      case MessageKind::partial_sum:
        append(wire::decode_vector(m.payload));
        break;
    }
  }
  return out;
}

PrivacyLossEstimate privacy_loss_mc(double shift_norm, double sigma, int k, double eps,
                                    std::int64_t samples, std::uint64_t seed, double delta_target) {
  require(shift_norm >= 0 && sigma > 0 && k >= 1 && eps > 0, ErrorCode::invalid_parameter,
          "privacy_loss_mc needs shift >= 0, sigma > 0, k >= 1, eps > 0");
  require(samples >= 1000, ErrorCode::invalid_parameter, "privacy_loss_mc needs >= 1000 samples");
  const auto dim = static_cast<std::size_t>(k);
  // The shift lies along the all-ones direction.
  const double m_coord = shift_norm / std::sqrt(static_cast<double>(k));
  const double m_sq = shift_norm * shift_norm;
  const auto counts = count_in_blocks<1>(samples, seed, [&](Rng& rng, std::int64_t len) {
    std::array<std::int64_t, 1> c{};
    std::vector<double> y(dim);
    for (std::int64_t s = 0; s < len; ++s) {
      rng.fill_gaussian(y, sigma);
      double dot = 0.0;
      for (double& v : y) {
        v += m_coord;
        dot += v * m_coord;
      }
      const double loss = (dot - 0.5 * m_sq) / (sigma * sigma);
      if (std::abs(loss) > eps) ++c[0];
    }
    return c;
  });
  const BinomialEstimate e = binomial_estimate(counts[0], samples);
  PrivacyLossEstimate r;
  r.eps_target = eps;
  r.delta_target = delta_target;
  r.empirical_exceed_rate = r.combined_rate = e.rate;
  r.standard_error = r.combined_standard_error = e.standard_error;
  r.samples = samples;
  return r;
}

double gaussian_loss_exceed_probability(double shift_norm, double sigma, double eps) {
  require(shift_norm >= 0 && sigma > 0 && eps > 0, ErrorCode::invalid_parameter,
          "need shift >= 0, sigma > 0, eps > 0");
  if (shift_norm == 0) return 0.0;
  const double mu = shift_norm * shift_norm / (2.0 * sigma * sigma);
  const double sd = std::sqrt(2.0 * mu);
  return normal_sf((eps - mu) / sd) + normal_cdf((-eps - mu) / sd);
}

PrivacyLossEstimate conditioned_projection_privacy(const ProtocolParams& params, const RealVector& x,
                                                   std::int64_t samples, std::uint64_t seed,
                                                   int coalition_size) {
  params.validate();
  require(x.dim() == static_cast<std::size_t>(params.d), ErrorCode::dimension_mismatch,
          "x must have dimension d");
  require(x.norm() <= 1.0 + 1e-12, ErrorCode::invalid_parameter, "x must have norm <= 1");
  require(samples >= 1000, ErrorCode::invalid_parameter, "needs >= 1000 samples");
  if (coalition_size < 0) coalition_size = params.S - 1;
  require(coalition_size < params.S, ErrorCode::invalid_subset, "coalition must exclude a verifier");

  const auto k = static_cast<std::size_t>(params.k);
  const auto d = static_cast<std::size_t>(params.d);
  const double c = c_delta(params.k, params.delta);
  const double sigma = std::sqrt(static_cast<double>(params.S - coalition_size)) * params.sigma_v;
  const double w_sigma = 1.0 / std::sqrt(static_cast<double>(params.k));

  // counts: bad, exceed (among good), combined
  const auto counts = count_in_blocks<3>(samples, seed, [&](Rng& rng, std::int64_t len) {
    std::array<std::int64_t, 3> cnt{};
    std::vector<double> w(k * d);
    std::vector<double> m(k);
    std::vector<double> y(k);
    for (std::int64_t s = 0; s < len; ++s) {
      rng.fill_gaussian(w, w_sigma);
      kernels::serial::matvec(w, k, d, x.values(), m);
      const double shift_sq = kernels::serial::squared_norm(m);
      if (std::sqrt(shift_sq) > c) {
        ++cnt[0];
        ++cnt[2];
        continue;
      }
      rng.fill_gaussian(y, sigma);
      double dot = 0.0;
      for (std::size_t i = 0; i < k; ++i) dot += (y[i] + m[i]) * m[i];
      const double loss = (dot - 0.5 * shift_sq) / (sigma * sigma);
      if (std::abs(loss) > params.eps) {
        ++cnt[1];
        ++cnt[2];
      }
    }
    return cnt;
  });
  PrivacyLossEstimate r;
  r.eps_target = params.eps;
  r.delta_target = 2.0 * params.delta;
  r.samples = samples;
  const BinomialEstimate exceed = binomial_estimate(counts[1], samples);
  const BinomialEstimate bad = binomial_estimate(counts[0], samples);
  const BinomialEstimate combined = binomial_estimate(counts[2], samples);
  r.empirical_exceed_rate = exceed.rate;
  r.standard_error = exceed.standard_error;
  r.bad_event_rate = bad.rate;
  r.bad_event_standard_error = bad.standard_error;
  r.combined_rate = combined.rate;
  r.combined_standard_error = combined.standard_error;
  return r;
}

std::vector<Chi2TailEstimate> chi2_tail_mc(int k, std::span<const double> xs, std::int64_t samples,
                                           std::uint64_t seed) {
  require(k >= 1 && samples >= 1, ErrorCode::invalid_parameter, "chi2_tail_mc needs k, samples >= 1");
  require(xs.size() <= 8, ErrorCode::invalid_parameter, "at most 8 tail points per call");
  std::array<Chi2Thresholds, 8> thresholds{};
  for (std::size_t i = 0; i < xs.size(); ++i) thresholds[i] = chi2_thresholds(k, xs[i]);

  const auto counts = count_in_blocks<16>(samples, seed, [&](Rng& rng, std::int64_t len) {
    std::array<std::int64_t, 16> cnt{};
    std::vector<double> z(static_cast<std::size_t>(k));
    for (std::int64_t s = 0; s < len; ++s) {
      rng.fill_gaussian(z, 1.0);
      const double q = kernels::serial::squared_norm(z);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (q >= thresholds[i].upper) ++cnt[2 * i];
        if (q <= thresholds[i].lower) ++cnt[2 * i + 1];
      }
    }
    return cnt;
  });
  std::vector<Chi2TailEstimate> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Chi2TailEstimate e;
    e.x = xs[i];
    e.upper = binomial_estimate(counts[2 * i], samples);
    e.lower = binomial_estimate(counts[2 * i + 1], samples);
    e.bound = std::exp(-xs[i]);
    out.push_back(e);
  }
  return out;
}

BinomialEstimate rate_estimate(const Scenario& scenario, const ProtocolParams& params,
                               const ScenarioEvent& event, std::int64_t trials, std::uint64_t seed) {
  require(trials >= 1, ErrorCode::invalid_parameter, "rate_estimate needs trials >= 1");
  scenario.validate();
  std::vector<char> hit(static_cast<std::size_t>(trials), 0);
  kernels::for_each_index(hit.size(), [&](std::size_t t) {
    const ScenarioRun run =
        run_scenario(scenario, params, derive_seed(seed, StreamTag::trial, {static_cast<std::uint64_t>(t)}));
    hit[t] = event(run) ? 1 : 0;
  });
  return binomial_estimate(std::count(hit.begin(), hit.end(), 1), trials);
}

std::vector<double> verification_norms(const BundleFactory& make_bundle, const ProtocolParams& params,
                                       std::int64_t trials, std::uint64_t seed, WMode w_mode) {
  require(trials >= 1, ErrorCode::invalid_parameter, "needs trials >= 1");
  params.validate();
  std::vector<double> norms(static_cast<std::size_t>(trials));
  kernels::for_each_index(norms.size(), [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(seed, StreamTag::trial, {static_cast<std::uint64_t>(t)});
    const ShareBundle bundle = make_bundle(derive_seed(trial_seed, StreamTag::client_shares));
    norms[t] = run_norm_verification(bundle, params, derive_seed(trial_seed, StreamTag::session), w_mode)
                   .outcome.v_norm;
  });
  return norms;
}

BinomialEstimate accept_rate(const BundleFactory& make_bundle, const ProtocolParams& params,
                             std::int64_t trials, std::uint64_t seed, WMode w_mode) {
  const std::vector<double> norms = verification_norms(make_bundle, params, trials, seed, w_mode);
  return binomial_estimate(std::count_if(norms.begin(), norms.end(),
                                         [&](double v) { return v < params.tau; }),
                           trials);
}

BundleFactory fixed_norm_bundles(const ProtocolParams& params, double norm, MassPattern pattern) {
  require(norm >= 0, ErrorCode::invalid_parameter, "norm must be >= 0");
  return [params, norm, pattern](std::uint64_t trial_seed) {
    RealVector input(params.d);
    RealVector share_sum;
    // make_submission builds the offset; reuse it to get the shares.
    const ClientSubmission sub =
        make_submission(ClientBehavior::norm_inflating, "client", input, params, norm, pattern,
                        trial_seed, &share_sum);
    ShareBundle bundle;
    bundle.client_id = sub.client_id;
    for (const auto& p : sub.payloads) bundle.shares.push_back(*p);
    return bundle;
  };
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void write_audit_csv(std::ostream& out, std::span<const AuditRow> rows) {
  out << "# schema: " << kAuditSchema << "\n";
  out << "check_id,parameters,statistic,threshold,verdict\n";
  char buf[64];
  for (const AuditRow& r : rows) {
    out << csv_field(r.check_id) << ',' << csv_field(r.parameters) << ',';
    std::snprintf(buf, sizeof buf, "%.10g", r.statistic);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.10g", r.threshold);
    out << buf << ',' << (r.pass ? "pass" : "fail") << '\n';
  }
}

}  // namespace secagg
