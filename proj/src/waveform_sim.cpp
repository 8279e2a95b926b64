#include "photocount/waveform_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "photocount/parallel.hpp"

namespace photocount {

namespace {

int draw_count(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<int> dist(mean);
  return dist(rng);
}

void draw_sorted_uniform(int n, double lo, double width, Rng& rng, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(n));
  for (auto& t : out) t = lo + width * rng.uniform();
  std::sort(out.begin(), out.end());
}

// Pulses ordered by start time: carry-in first, then in-symbol.
struct Workspace {
  ArrivalSet arrivals;
  std::vector<double> start;
  std::vector<double> end;
  std::vector<double> amp;
  std::vector<double> values;
  std::vector<std::uint8_t> prev;
};

void build_pulses(const ArrivalSet& a, const ReceiverConfig& cfg, Rng& rng, Workspace& ws) {
  ws.start.clear();
  ws.start.insert(ws.start.end(), a.carry_in.begin(), a.carry_in.end());
  ws.start.insert(ws.start.end(), a.times.begin(), a.times.end());
  ws.end.resize(ws.start.size());
  ws.amp.resize(ws.start.size());
  for (std::size_t i = 0; i < ws.start.size(); ++i) ws.end[i] = ws.start[i] + cfg.holding_time;
  if (cfg.shot_sigma > 0.0) {
    std::normal_distribution<double> amplitude(1.0, cfg.shot_sigma);
    for (auto& x : ws.amp) x = amplitude(rng);
  } else {
    std::fill(ws.amp.begin(), ws.amp.end(), 1.0);
  }
}

double covered_level(const Workspace& ws, std::size_t lo, std::size_t hi) {
  double level = 0.0;
  for (std::size_t i = lo; i < hi; ++i) level += ws.amp[i];
  return level;
}

// Analog values at t_k = k/N for k = k0..N into ws.values[k - k0].
void sample_values(const ReceiverConfig& cfg, int k0, Rng& rng, Workspace& ws) {
  const int n = cfg.samples_per_symbol();
  ws.values.resize(static_cast<std::size_t>(n - k0 + 1));
  const bool noisy = cfg.thermal_sigma > 0.0;
  std::normal_distribution<double> noise(0.0, noisy ? cfg.thermal_sigma : 1.0);
  std::size_t lo = 0, hi = 0;
  const std::size_t count = ws.start.size();
  for (int k = k0; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    while (hi < count && ws.start[hi] <= t) ++hi;
    while (lo < hi && ws.end[lo] <= t) ++lo;
    double v = covered_level(ws, lo, hi);
    if (noisy) v += noise(rng);
    ws.values[static_cast<std::size_t>(k - k0)] = v;
  }
}

// Smallest k in [0, n+1] with k/n >= e, evaluated exactly as the sampler does.
int first_sample_at_or_after(double e, int n) {
  if (e <= 0.0) return 0;
  double guess = std::ceil(e * n);
  if (guess > n + 1) return n + 1;
  int k = static_cast<int>(guess);
  while (k > 0 && static_cast<double>(k - 1) / n >= e) --k;
  while (k <= n && static_cast<double>(k) / n < e) ++k;
  return k;
}

void record_bits(double level, int k, std::span<const double> thresholds, std::span<int> counts,
                 std::vector<std::uint8_t>& prev) {
  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    const std::uint8_t bit = level >= thresholds[j];
    if (k > 0) counts[j] += bit & !prev[j];
    prev[j] = bit;
  }
}

void simulate_into(double lambda, const ReceiverConfig& cfg, std::span<const double> thresholds,
                   Rng& rng, StartState start, Workspace& ws, std::span<int> counts,
                   TrialResult& result) {
  ws.arrivals = gen_arrivals(lambda, cfg.holding_time, start, rng);
  result.arrivals = static_cast<int>(ws.arrivals.times.size());
  build_pulses(ws.arrivals, cfg, rng, ws);
  const int n = cfg.samples_per_symbol();
  const int k0 = start == StartState::kStationary ? 0 : 1;
  std::fill(counts.begin(), counts.end(), 0);

  if (cfg.thermal_sigma > 0.0) {
    sample_values(cfg, k0, rng, ws);
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
      const double xi = thresholds[j];
      std::uint8_t prev = k0 == 0 ? static_cast<std::uint8_t>(ws.values[0] >= xi) : 0;
      int edges = 0;
      for (std::size_t i = static_cast<std::size_t>(1 - k0); i < ws.values.size(); ++i) {
        const std::uint8_t bit = ws.values[i] >= xi;
        edges += bit & !prev;
        prev = bit;
      }
      counts[j] = edges;
    }
    return;
  }

  // Noise-free samples: the level only changes at pulse starts and ends, so
  // walk the merged event times. Pulses [ends_passed, starts_passed) cover
  // every sample of a segment, summed in the same order as sample_values.
  ws.prev.assign(thresholds.size(), 0);
  const std::size_t count = ws.start.size();
  std::size_t starts_passed = 0, ends_passed = 0;
  int k = k0;
  while (k <= n) {
    double next = INFINITY;
    if (starts_passed < count) next = ws.start[starts_passed];
    if (ends_passed < count) next = std::min(next, ws.end[ends_passed]);
    const int k_end = first_sample_at_or_after(next, n);
    if (k_end > k) {
      const double level = covered_level(ws, ends_passed, starts_passed);
      record_bits(level, k, thresholds, counts, ws.prev);
      k = k_end;
    }
    while (starts_passed < count && ws.start[starts_passed] <= next) ++starts_passed;
    while (ends_passed < count && ws.end[ends_passed] <= next) ++ends_passed;
  }
}

void add_count(CountHistogram& h, int n) {
  const auto idx = static_cast<std::size_t>(n);
  if (idx >= h.size()) h.resize(idx + 1, 0);
  ++h[idx];
}

}  // namespace

ArrivalSet gen_arrivals(double lambda, Rng& rng) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
  ArrivalSet a;
  draw_sorted_uniform(draw_count(lambda, rng), 0.0, 1.0, rng, a.times);
  return a;
}

ArrivalSet gen_arrivals(double lambda, double tau, StartState start, Rng& rng) {
  ArrivalSet a = gen_arrivals(lambda, rng);
  if (start == StartState::kStationary)
    draw_sorted_uniform(draw_count(lambda * tau, rng), -tau, tau, rng, a.carry_in);
  return a;
}


SampleStream synth_samples(const ArrivalSet& arrivals, const ReceiverConfig& cfg, Rng& rng,
                           StartState start) {
  cfg.validate();
  Workspace ws;
  build_pulses(arrivals, cfg, rng, ws);
  const int k0 = start == StartState::kStationary ? 0 : 1;
  sample_values(cfg, k0, rng, ws);
  SampleStream s;
  if (k0 == 0) {
    s.initial_value = ws.values.front();
    s.initial_bit = s.initial_value >= cfg.threshold;
  }
  s.values.assign(ws.values.begin() + (1 - k0), ws.values.end());
  s.bits.resize(s.values.size());
  for (std::size_t i = 0; i < s.values.size(); ++i) s.bits[i] = s.values[i] >= cfg.threshold;
  return s;
}

int count_rising_edges(std::span<const std::uint8_t> bits, std::uint8_t initial) {
  int edges = 0;
  std::uint8_t prev = initial != 0;
  for (const std::uint8_t b : bits) {
    const std::uint8_t bit = b != 0;
    edges += bit & !prev;
    prev = bit;
  }
  return edges;
}

TrialResult simulate_symbol_thresholds(double lambda, const ReceiverConfig& cfg,
                                       std::span<const double> thresholds, Rng& rng,
                                       std::span<int> counts, StartState start) {
  cfg.validate();
  if (counts.size() != thresholds.size())
    throw InvalidArgument("counts and thresholds must have equal length");
  Workspace ws;
  TrialResult r;
  simulate_into(lambda, cfg, thresholds, rng, start, ws, counts, r);
  if (!counts.empty()) r.n_s = counts[0];
  return r;
}

TrialResult simulate_symbol(double lambda, const ReceiverConfig& cfg, Rng& rng, StartState start) {
  int n_s = 0;
  const double xi = cfg.threshold;
  return simulate_symbol_thresholds(lambda, cfg, std::span<const double>(&xi, 1), rng,
                                    std::span<int>(&n_s, 1), start);
}

std::vector<McMoments> estimate_moments_mc_thresholds(double lambda, const ReceiverConfig& cfg,
                                                      std::span<const double> thresholds,
                                                      std::uint64_t trials, std::uint64_t seed,
                                                      const SimOptions& opts) {
  cfg.validate();
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (!std::isfinite(lambda) || lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
  const std::size_t m = thresholds.size();
  struct Partial {
    std::vector<CountHistogram> hist;
    std::uint64_t arrivals = 0;
  };
  const int workers = opts.workers > 0 ? opts.workers : default_workers();
  std::vector<Partial> partial(static_cast<std::size_t>(workers));
  parallel_chunks(trials, workers, [&](std::uint64_t chunk, std::uint64_t begin, std::uint64_t end) {
    Partial& out = partial[chunk];
    out.hist.assign(m, CountHistogram{});
    Workspace ws;
    std::vector<int> counts(m);
    TrialResult r;
    for (std::uint64_t i = begin; i < end; ++i) {
      Rng rng(seed, StreamId::kSymbol, i);
      simulate_into(lambda, cfg, thresholds, rng, opts.start, ws, counts, r);
      out.arrivals += static_cast<std::uint64_t>(r.arrivals);
      for (std::size_t j = 0; j < m; ++j) add_count(out.hist[j], counts[j]);
    }
  });

  std::vector<McMoments> result(m);
  for (const Partial& p : partial) {
    if (p.hist.empty()) continue;
    for (std::size_t j = 0; j < m; ++j) {
      CountHistogram& h = result[j].histogram;
      if (p.hist[j].size() > h.size()) h.resize(p.hist[j].size(), 0);
      for (std::size_t n = 0; n < p.hist[j].size(); ++n) h[n] += p.hist[j][n];
      result[j].arrivals += p.arrivals;
    }
  }
  for (auto& r : result) r.moments = sample_moments(r.histogram);
  return result;
}

McMoments estimate_moments_mc(double lambda, const ReceiverConfig& cfg, std::uint64_t trials,
                              std::uint64_t seed, const SimOptions& opts) {
  const double xi = cfg.threshold;
  return std::move(
      estimate_moments_mc_thresholds(lambda, cfg, std::span<const double>(&xi, 1), trials, seed,
                                     opts)
          .front());
}

CountHistogram ideal_counter_histogram(double lambda, double tau, std::uint64_t trials,
                                       std::uint64_t seed, int workers) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("tau must lie in (0, 1)");
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (workers <= 0) workers = default_workers();
  std::vector<CountHistogram> partial(static_cast<std::size_t>(workers));
  parallel_chunks(trials, workers, [&](std::uint64_t chunk, std::uint64_t begin, std::uint64_t end) {
    CountHistogram& h = partial[chunk];
    std::vector<double> times;
    for (std::uint64_t i = begin; i < end; ++i) {
      Rng rng(seed, StreamId::kIdealCounter, i);
      draw_sorted_uniform(draw_count(lambda, rng), 0.0, 1.0, rng, times);
      double last = -INFINITY;
      const int carry = draw_count(lambda * tau, rng);
      for (int c = 0; c < carry; ++c) last = std::max(last, -tau * rng.uniform());
      int recorded = 0;
      for (const double t : times) {
        recorded += (t - last >= tau);
        last = t;
      }
      add_count(h, recorded);
    }
  });
  CountHistogram total;
  for (const auto& h : partial) {
    if (h.size() > total.size()) total.resize(h.size(), 0);
    for (std::size_t n = 0; n < h.size(); ++n) total[n] += h[n];
  }
  return total;
}

}  // namespace photocount
