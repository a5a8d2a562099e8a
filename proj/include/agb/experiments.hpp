#pragma once

// Experiment harness: seeded corpora, democracy / quasi-greedy / partial-sum /
// Khintchine / almost-greedy measurements, and a plain Walsh baseline.
// Every record carries the seed of the trial that produced it; all
// randomness is drawn from per-trial streams so thread count never changes
// the output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "agb/basis.hpp"
#include "agb/errors.hpp"
#include "agb/greedy.hpp"
#include "agb/norms.hpp"
#include "agb/parallel.hpp"
#include "agb/walsh.hpp"

namespace agb {

struct GeneratorSpec {
    std::string kind;       // decay, flat_block, lacunary, random, flat_signed_block, indicator
    std::size_t count = 1;  // functions drawn from this generator
    double alpha = 1.0;     // decay
    std::size_t terms = 10; // decay, random
    std::size_t block = 1;  // flat_block
    double fraction = 1.0;  // flat_block
    std::size_t depth = 2;  // flat_signed_block, indicator
    double delta = 0.05;    // flat_signed_block
    std::uint64_t cells = 1; // indicator of [0, cells / 2^depth)
};

struct CorpusSpec {
    std::vector<GeneratorSpec> generators;
};

struct CorpusItem {
    std::string label;
    CoefficientList coeffs;  // in the psi basis, sorted by index
    WalshSpectrum spectrum;
};

struct ExperimentConfig {
    GrowthSchedule plan = GrowthSchedule::desk();
    std::vector<double> ps{2.0, 4.0};
    std::vector<std::uint64_t> sizes;  // set sizes, m-grid or n-grid; empty means the default grid
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    NormEngine engine = NormEngine::automatic;
    std::size_t samples = 20000;
    CorpusSpec corpus;
    std::size_t max_length = 16;
    std::size_t random_candidates = 16;
    std::uint64_t exhaustive_limit = 252;
    std::map<std::string, double> thresholds;
};

struct ResultRecord {
    std::string experiment;
    std::string plan;
    double p = 2.0;
    std::int64_t size_or_m = 0;
    std::int64_t trial = 0;  // -1 on summary rows
    double value = 0.0;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    bool exact = true;
    std::uint64_t seed = 0;
};

enum class ExperimentKind { democracy, quasigreedy, partialsum, khintchine, almostgreedy, walsh_baseline };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::democracy: return "democracy";
    case ExperimentKind::quasigreedy: return "quasigreedy";
    case ExperimentKind::partialsum: return "partialsum";
    case ExperimentKind::khintchine: return "khintchine";
    case ExperimentKind::almostgreedy: return "almostgreedy";
    case ExperimentKind::walsh_baseline: return "walsh-baseline";
    }
    return "";
}

inline ExperimentKind parse_experiment_kind(const std::string& s) {
    for (auto k : {ExperimentKind::democracy, ExperimentKind::quasigreedy, ExperimentKind::partialsum,
                   ExperimentKind::khintchine, ExperimentKind::almostgreedy, ExperimentKind::walsh_baseline}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown experiment '" + s + "'");
}

namespace detail {

enum : std::uint64_t { kCorpusStream = 1, kTrialStream = 2 };

inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    return derive_seed(derive_seed(master, stream), index);
}

inline BlockPlan config_plan(const ExperimentConfig& cfg) {
    try {
        return validate_schedule(cfg.plan);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

inline std::uint64_t plan_total(const BlockPlan& plan) {
    const auto t = plan.total_size();
    if (!t) throw ResourceError("plan has more than 2^64 basis elements");
    return *t;
}

inline double random_sign(std::mt19937_64& rng) { return (rng() & 1U) ? -1.0 : 1.0; }

// q(n) = n_1 n_2 + n_3 n_4 + ... over the binary digits of n (bent for even depth).
inline unsigned bent_parity(std::uint64_t n) {
    unsigned q = 0;
    for (; n; n >>= 2) q ^= unsigned(n & 1U) & unsigned((n >> 1) & 1U);
    return q;
}

inline CoefficientList generate_coefficients(const GeneratorSpec& g, const BlockPlan& plan, std::uint64_t seed,
                                             WalshSpectrum& spectrum) {
    std::mt19937_64 rng(seed);
    const std::uint64_t total = plan_total(plan);
    CoefficientList c;
    auto need = [&](std::uint64_t n, const char* what) {
        if (n == 0 || n > total) {
            throw ConfigError(std::string(what) + ": needs " + std::to_string(n) + " indices, plan has " +
                              std::to_string(total));
        }
    };
    if (g.kind == "decay") {
        need(g.terms, "decay");
        for (std::uint64_t m = 1; m <= g.terms; ++m) c.push_back({m, random_sign(rng) * std::pow(double(m), -g.alpha)});
    } else if (g.kind == "flat_block") {
        if (g.block == 0 || g.block > plan.horizon()) throw ConfigError("flat_block: block outside plan");
        const auto n = plan.block_size_u64(g.block);
        if (!n || *n > kDefaultMaterializationCap) throw ResourceError("flat_block: block too large");
        if (!(g.fraction > 0.0 && g.fraction <= 1.0)) throw ConfigError("flat_block: fraction must be in (0, 1]");
        std::vector<std::uint64_t> rows(*n);
        std::iota(rows.begin(), rows.end(), 1);
        std::shuffle(rows.begin(), rows.end(), rng);
        const auto keep = std::max<std::size_t>(1, std::size_t(std::llround(g.fraction * double(*n))));
        rows.resize(keep);
        for (auto i : rows) c.push_back({plan.to_global(g.block, i), random_sign(rng)});
    } else if (g.kind == "lacunary") {
        for (std::uint64_t m = 1; m <= total; m <<= 1) c.push_back({m, random_sign(rng)});
    } else if (g.kind == "random") {
        need(g.terms, "random");
        std::vector<std::uint64_t> idx(total);
        std::iota(idx.begin(), idx.end(), 1);
        std::shuffle(idx.begin(), idx.end(), rng);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (std::size_t j = 0; j < g.terms; ++j) c.push_back({idx[j], u(rng)});
    } else if (g.kind == "flat_signed_block") {
        if (g.depth == 0 || g.depth > 30) throw ConfigError("flat_signed_block: depth must be in 1..30");
        need(std::uint64_t{1} << g.depth, "flat_signed_block");
        for (std::uint64_t n = 0; n < (std::uint64_t{1} << g.depth); ++n) {
            const bool plus = bent_parity(n) == 0;
            c.push_back({n + 1, plus ? 1.0 + g.delta : -1.0});
        }
    } else if (g.kind == "indicator") {
        if (g.depth > 24) throw ConfigError("indicator: depth must be <= 24");
        const std::uint64_t cells = std::uint64_t{1} << g.depth;
        if (g.cells == 0 || g.cells > cells) throw ConfigError("indicator: cells outside 1..2^depth");
        std::vector<double> v(cells, 0.0);
        std::fill_n(v.begin(), g.cells, 1.0);
        spectrum = analyze_dense(DenseDyadic(g.depth, std::move(v)));
        try {
            return analyze(spectrum, plan);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("indicator is not in the plan span: ") + e.what());
        }
    } else {
        throw ConfigError("unknown corpus generator '" + g.kind + "'");
    }
    std::ranges::sort(c, {}, &Coefficient::index);
    spectrum = combination_spectrum(plan, c);
    return c;
}

inline std::string generator_label(const GeneratorSpec& g) {
    if (g.kind == "decay") return "decay(" + std::to_string(g.alpha) + "," + std::to_string(g.terms) + ")";
    if (g.kind == "flat_block") return "flat_block(" + std::to_string(g.block) + ")";
    if (g.kind == "random") return "random(" + std::to_string(g.terms) + ")";
    if (g.kind == "flat_signed_block") return "flat_signed_block(" + std::to_string(g.depth) + ")";
    if (g.kind == "indicator") return "indicator(" + std::to_string(g.depth) + "," + std::to_string(g.cells) + ")";
    return g.kind;
}

} // namespace detail

/// Deterministic corpus: generator j contributes `count` functions; item i
/// is drawn from its own seed stream.
inline std::vector<CorpusItem> corpus_generate(const CorpusSpec& spec, const BlockPlan& plan, std::uint64_t seed) {
    std::vector<CorpusItem> out;
    for (const auto& g : spec.generators) {
        for (std::size_t r = 0; r < g.count; ++r) {
            CorpusItem item;
            item.label = detail::generator_label(g);
            item.coeffs = detail::generate_coefficients(g, plan, detail::stream_seed(seed, detail::kCorpusStream, out.size()),
                                                        item.spectrum);
            out.push_back(std::move(item));
        }
    }
    return out;
}

namespace detail {

struct Ratio {
    double value = 0.0;
    std::optional<double> lo, hi;
    bool exact = true;
};

inline Ratio ratio(const NormEstimate& num, const NormEstimate& den) {
    Ratio r{num.value / den.value, {}, {}, num.exact() && den.exact()};
    if (r.exact) return r;
    const double nl = num.ci_low.value_or(num.value), nh = num.ci_high.value_or(num.value);
    const double dl = den.ci_low.value_or(den.value), dh = den.ci_high.value_or(den.value);
    r.lo = nl / dh;
    r.hi = dl > 0.0 ? nh / dl : std::numeric_limits<double>::infinity();
    return r;
}

class Recorder {
public:
    Recorder(std::string plan, std::uint64_t seed) : plan_(std::move(plan)), seed_(seed) {}

    void add(const std::string& experiment, double p, std::int64_t size, std::int64_t trial, const Ratio& r) {
        rows_.push_back({experiment, plan_, p, size, trial, r.value, r.lo, r.hi, r.exact, seed_});
    }
    void add(const std::string& experiment, double p, std::int64_t size, std::int64_t trial, double v) {
        add(experiment, p, size, trial, Ratio{v, {}, {}, true});
    }
    std::vector<ResultRecord>& rows() { return rows_; }

private:
    std::string plan_;
    std::uint64_t seed_;
    std::vector<ResultRecord> rows_;
};

inline NormEstimate norm_of(const WalshSpectrum& f, double p, const ExperimentConfig& cfg, std::uint64_t seed) {
    NormOptions opt;
    opt.engine = cfg.engine;
    opt.samples = cfg.samples;
    opt.seed = seed;
    opt.threads = 1;
    return lp_norm(f, p, opt);
}

// Running max/min per (experiment, p, size) over trial rows.
inline void summarize(std::vector<ResultRecord>& rows, const std::string& source, const std::string& name,
                      bool take_max, bool per_size, std::uint64_t seed) {
    std::map<std::pair<double, std::int64_t>, ResultRecord> best;
    for (const auto& r : rows) {
        if (r.experiment != source) continue;
        const auto key = std::make_pair(r.p, per_size ? r.size_or_m : std::int64_t{-1});
        auto it = best.find(key);
        if (it == best.end()) {
            ResultRecord s = r;
            s.experiment = name;
            s.size_or_m = key.second;
            s.trial = -1;
            s.seed = seed;
            best.emplace(key, s);
            continue;
        }
        auto& s = it->second;
        if (take_max ? r.value > s.value : r.value < s.value) {
            s.value = r.value;
            s.ci_low = r.ci_low;
            s.ci_high = r.ci_high;
        }
        s.exact = s.exact && r.exact;
    }
    for (auto& [key, s] : best) rows.push_back(std::move(s));
}

template <class PerItem>
std::vector<ResultRecord> run_items(std::size_t n, unsigned threads, PerItem&& per_item) {
    std::vector<std::vector<ResultRecord>> slots(n);
    parallel_for(n, threads, [&](std::size_t i) { slots[i] = per_item(i); });
    std::vector<ResultRecord> out;
    for (auto& s : slots) out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    return out;
}

inline std::vector<std::uint64_t> default_sizes(const ExperimentConfig& cfg, std::uint64_t upper) {
    std::vector<std::uint64_t> out;
    if (!cfg.sizes.empty()) {
        for (auto s : cfg.sizes) if (s >= 1 && s <= upper) out.push_back(s);
        return out;
    }
    for (std::uint64_t s = 1; s <= upper; ++s) out.push_back(s);
    return out;
}

inline WalshSpectrum restricted(const BlockPlan& plan, const CoefficientList& c, const std::vector<char>& drop) {
    CoefficientList kept;
    for (std::size_t j = 0; j < c.size(); ++j) if (!drop[j]) kept.push_back(c[j]);
    return combination_spectrum(plan, kept);
}

inline void require_ps(const ExperimentConfig& cfg) {
    if (cfg.ps.empty()) throw ConfigError("config lists no p values");
    for (double p : cfg.ps) if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("p must be a finite value >= 1");
}

inline std::vector<CorpusItem> config_corpus(const ExperimentConfig& cfg, const BlockPlan& plan) {
    if (cfg.corpus.generators.empty()) throw ConfigError("config has no corpus");
    return corpus_generate(cfg.corpus, plan, cfg.seed);
}

} // namespace detail

/// ||sum_{m in A} psi_m||_p / |A|^{1/2} for random A of each size.
inline std::vector<ResultRecord> democracy_experiment(const ExperimentConfig& cfg) {
    const BlockPlan plan = detail::config_plan(cfg);
    detail::require_ps(cfg);
    const std::uint64_t total = detail::plan_total(plan);
    const auto sizes = detail::default_sizes(cfg, std::min<std::uint64_t>(total, 200));
    for (auto s : cfg.sizes) if (s == 0 || s > total) throw ConfigError("democracy: size outside 1..plan size");
    const std::size_t trials = cfg.trials;
    auto rows = detail::run_items(sizes.size() * trials, cfg.threads, [&](std::size_t i) {
        const std::uint64_t size = sizes[i / trials];
        const auto trial = std::int64_t(i % trials);
        const std::uint64_t seed = detail::stream_seed(cfg.seed, detail::kTrialStream, i);
        std::mt19937_64 rng(seed);
        std::vector<std::uint64_t> idx(total);
        std::iota(idx.begin(), idx.end(), 1);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(size);
        const WalshSpectrum f = sum_spectrum(plan, idx);
        detail::Recorder rec(plan.label(), seed);
        for (std::size_t q = 0; q < cfg.ps.size(); ++q) {
            const auto norm = detail::norm_of(f, cfg.ps[q], cfg, derive_seed(seed, q));
            const auto scale = NormEstimate::exact_value(cfg.ps[q], std::sqrt(double(size)));
            rec.add("democracy", cfg.ps[q], std::int64_t(size), trial, detail::ratio(norm, scale));
        }
        return std::move(rec.rows());
    });
    detail::summarize(rows, "democracy", "democracy:min", false, true, cfg.seed);
    detail::summarize(rows, "democracy", "democracy:max", true, true, cfg.seed);
    detail::summarize(rows, "democracy", "democracy:overall_min", false, false, cfg.seed);
    detail::summarize(rows, "democracy", "democracy:overall_max", true, false, cfg.seed);
    return rows;
}

/// ||G_m f||_p / ||f||_p and ||f - G_m f||_p / ||f||_p along the greedy
/// order for every corpus function; the constant is the sup over f and m.
inline std::vector<ResultRecord> quasi_greedy_experiment(const ExperimentConfig& cfg) {
    const BlockPlan plan = detail::config_plan(cfg);
    detail::require_ps(cfg);
    const auto corpus = detail::config_corpus(cfg, plan);
    auto rows = detail::run_items(corpus.size(), cfg.threads, [&](std::size_t t) {
        const auto& item = corpus[t];
        const std::uint64_t seed = detail::stream_seed(cfg.seed, detail::kTrialStream, t);
        detail::Recorder rec(plan.label(), seed);
        const auto rho = greedy_order(item.coeffs);
        const CoefficientList& ordered = rho.order;
        const auto support = ordered.size();
        std::vector<double> tails(support + 1, 0.0);
        for (std::size_t j = support; j-- > 0;) tails[j] = tails[j + 1] + ordered[j].value * ordered[j].value;
        std::uint64_t salt = 0;
        std::vector<NormEstimate> fn;
        for (double p : cfg.ps) fn.push_back(detail::norm_of(item.spectrum, p, cfg, derive_seed(seed, salt++)));
        std::vector<detail::Ratio> sup(cfg.ps.size(), detail::Ratio{0.0, {}, {}, true});
        for (auto m : detail::default_sizes(cfg, support)) {
            const WalshSpectrum g = greedy_sum(plan, rho, m);
            std::vector<char> head(support, 0);
            std::fill_n(head.begin(), m, 1);
            const WalshSpectrum residual = detail::restricted(plan, ordered, head);
            rec.add("quasigreedy:residual_l2", 2.0, std::int64_t(m), std::int64_t(t), residual.l2_norm());
            rec.add("quasigreedy:parseval_tail", 2.0, std::int64_t(m), std::int64_t(t), std::sqrt(tails[m]));
            for (std::size_t q = 0; q < cfg.ps.size(); ++q) {
                const double p = cfg.ps[q];
                const auto gr = detail::ratio(detail::norm_of(g, p, cfg, derive_seed(seed, salt++)), fn[q]);
                const auto rr = detail::ratio(detail::norm_of(residual, p, cfg, derive_seed(seed, salt++)), fn[q]);
                rec.add("quasigreedy", p, std::int64_t(m), std::int64_t(t), gr);
                rec.add("quasigreedy:residual", p, std::int64_t(m), std::int64_t(t), rr);
                if (gr.value > sup[q].value) sup[q] = gr;
            }
        }
        for (std::size_t q = 0; q < cfg.ps.size(); ++q) {
            rec.add("quasigreedy:sup", cfg.ps[q], std::int64_t(support), std::int64_t(t), sup[q]);
        }
        return std::move(rec.rows());
    });
    detail::summarize(rows, "quasigreedy:sup", "quasigreedy:constant", true, false, cfg.seed);
    return rows;
}

/// ||S_n f||_p / ||f||_p over the corpus. The default n-grid is every
/// support index plus every block end.
inline std::vector<ResultRecord> partial_sum_experiment(const ExperimentConfig& cfg) {
    const BlockPlan plan = detail::config_plan(cfg);
    detail::require_ps(cfg);
    const auto corpus = detail::config_corpus(cfg, plan);
    std::set<std::uint64_t> ends;
    for (std::size_t k = 1; k <= plan.horizon(); ++k) ends.insert(plan.to_global(k, *plan.block_size_u64(k)));
    auto rows = detail::run_items(corpus.size(), cfg.threads, [&](std::size_t t) {
        const auto& item = corpus[t];
        const std::uint64_t seed = detail::stream_seed(cfg.seed, detail::kTrialStream, t);
        detail::Recorder rec(plan.label(), seed);
        std::set<std::uint64_t> grid;
        if (cfg.sizes.empty()) {
            for (const auto& c : item.coeffs) grid.insert(c.index);
            grid.insert(ends.begin(), ends.end());
        } else {
            grid.insert(cfg.sizes.begin(), cfg.sizes.end());
        }
        std::vector<NormEstimate> fn;
        for (std::size_t q = 0; q < cfg.ps.size(); ++q) fn.push_back(detail::norm_of(item.spectrum, cfg.ps[q], cfg, derive_seed(seed, q)));
        std::uint64_t salt = cfg.ps.size();
        for (auto n : grid) {
            if (n == 0) continue;
            CoefficientList kept;
            for (const auto& c : item.coeffs) if (c.index <= n) kept.push_back(c);
            const WalshSpectrum s = combination_spectrum(plan, kept);
            const std::string name = ends.count(n) ? "partialsum" : "partialsum:interior";
            for (std::size_t q = 0; q < cfg.ps.size(); ++q) {
                const auto sn = detail::norm_of(s, cfg.ps[q], cfg, derive_seed(seed, salt++));
                rec.add(name, cfg.ps[q], std::int64_t(n), std::int64_t(t), detail::ratio(sn, fn[q]));
            }
        }
        return std::move(rec.rows());
    });
    detail::summarize(rows, "partialsum", "partialsum:boundary_max", true, false, cfg.seed);
    detail::summarize(rows, "partialsum:interior", "partialsum:interior_max", true, false, cfg.seed);
    std::vector<ResultRecord> both;
    for (const auto& r : rows) {
        if (r.experiment == "partialsum:boundary_max" || r.experiment == "partialsum:interior_max") {
            both.push_back(r);
            both.back().experiment = "both";
        }
    }
    detail::summarize(both, "both", "partialsum:constant", true, false, cfg.seed);
    for (auto& r : both) if (r.experiment == "partialsum:constant") rows.push_back(r);
    return rows;
}

/// ||sum a_k r_k||_p / ||a||_2 by exact enumeration of all 2^n sign patterns
/// (n <= 16). Summary rows give the empirical A_p (min) and B_p (max).
inline std::vector<ResultRecord> khintchine_experiment(const ExperimentConfig& cfg) {
    detail::require_ps(cfg);
    if (cfg.max_length == 0 || cfg.max_length > 16) throw ConfigError("khintchine: max_length must be in 1..16");
    auto rows = detail::run_items(cfg.trials, cfg.threads, [&](std::size_t t) {
        const std::uint64_t seed = detail::stream_seed(cfg.seed, detail::kTrialStream, t);
        std::mt19937_64 rng(seed);
        const std::size_t n = 1 + rng() % cfg.max_length;
        std::normal_distribution<double> normal;
        std::vector<WalshTerm> terms;
        double a2 = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            const double a = normal(rng);
            a2 += a * a;
            terms.push_back({rademacher_index(k), a});
        }
        const WalshSpectrum f(std::move(terms));
        detail::Recorder rec("rademacher", seed);
        for (double p : cfg.ps) {
            rec.add("khintchine", p, std::int64_t(n), std::int64_t(t), lp_dense(f, p).value / std::sqrt(a2));
        }
        return std::move(rec.rows());
    });
    detail::summarize(rows, "khintchine", "khintchine:A_p", false, false, cfg.seed);
    detail::summarize(rows, "khintchine", "khintchine:B_p", true, false, cfg.seed);
    return rows;
}

namespace detail {

// Candidate index sets of size m (as positions into c). Exhaustive when
// C(|c|, m) <= limit; the second value says whether that happened.
inline std::pair<std::vector<std::vector<char>>, bool> candidate_sets(const CoefficientList& c, std::size_t m,
                                                                      const BlockPlan& plan, std::size_t random_sets,
                                                                      std::uint64_t limit, std::mt19937_64& rng) {
    const std::size_t n = c.size();
    std::vector<std::vector<char>> sets;
    auto from_positions = [&](const std::vector<std::size_t>& pos) {
        std::vector<char> s(n, 0);
        for (std::size_t j = 0; j < m; ++j) s[pos[j]] = 1;
        sets.push_back(std::move(s));
    };
    // binomial with early exit above the limit
    double combos = 1.0;
    for (std::size_t j = 0; j < m && combos <= double(limit); ++j) combos = combos * double(n - j) / double(j + 1);
    if (combos <= double(limit)) {
        std::vector<char> mask(n, 0);
        std::fill_n(mask.end() - std::ptrdiff_t(m), m, 1);
        do sets.push_back(mask);
        while (std::next_permutation(mask.begin(), mask.end()));
        return {sets, true};
    }
    std::vector<std::size_t> pos(n);
    std::iota(pos.begin(), pos.end(), 0);
    auto by_magnitude = [&](bool low_index_first) {
        return [&, low_index_first](std::size_t a, std::size_t b) {
            const double x = std::abs(c[a].value), y = std::abs(c[b].value);
            if (x != y) return x > y;
            return low_index_first ? c[a].index < c[b].index : c[a].index > c[b].index;
        };
    };
    std::ranges::sort(pos, by_magnitude(true));
    from_positions(pos);  // greedy
    std::ranges::sort(pos, by_magnitude(false));
    from_positions(pos);  // best l2 with the opposite tie rule
    std::iota(pos.begin(), pos.end(), 0);
    from_positions(pos);  // natural prefix
    std::ranges::reverse(pos);
    from_positions(pos);  // natural suffix
    for (std::size_t k = 1; k <= plan.horizon(); ++k) {
        // block k first (by magnitude), then the rest greedily
        std::iota(pos.begin(), pos.end(), 0);
        std::ranges::stable_sort(pos, by_magnitude(true));
        std::ranges::stable_partition(pos, [&](std::size_t j) { return plan.to_block(c[j].index).block == k; });
        from_positions(pos);
    }
    for (std::size_t r = 0; r < random_sets; ++r) {
        std::iota(pos.begin(), pos.end(), 0);
        std::shuffle(pos.begin(), pos.end(), rng);
        from_positions(pos);
    }
    std::ranges::sort(sets);
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    return {sets, false};
}

inline std::vector<std::uint64_t> almost_greedy_grid(const ExperimentConfig& cfg, std::size_t support) {
    if (support < 2) return {};
    if (!cfg.sizes.empty() || support <= 24) return default_sizes(cfg, support - 1);
    std::vector<std::uint64_t> out;
    for (std::uint64_t m = 1; m < support; m = m < 4 ? m + 1 : m + m / 2) out.push_back(m);
    return out;
}

} // namespace detail

/// ||f - G_m f||_p / min_A ||f - P_A f||_p with A over candidate sets of
/// size m. Rows named "almostgreedy" use an exhaustive minimum; rows named
/// "almostgreedy:proxy" use the candidate search, whose minimum can only
/// overestimate the true one.
inline std::vector<ResultRecord> almost_greedy_experiment(const ExperimentConfig& cfg) {
    const BlockPlan plan = detail::config_plan(cfg);
    detail::require_ps(cfg);
    const auto corpus = detail::config_corpus(cfg, plan);
    auto rows = detail::run_items(corpus.size(), cfg.threads, [&](std::size_t t) {
        const auto& item = corpus[t];
        const std::uint64_t seed = detail::stream_seed(cfg.seed, detail::kTrialStream, t);
        std::mt19937_64 rng(seed);
        detail::Recorder rec(plan.label(), seed);
        const auto rho = greedy_order(item.coeffs);
        const CoefficientList& c = rho.order;
        std::uint64_t salt = 0;
        for (auto m : detail::almost_greedy_grid(cfg, c.size())) {
            std::vector<char> greedy(c.size(), 0);
            std::fill_n(greedy.begin(), m, 1);
            const auto [sets, exhaustive] =
                detail::candidate_sets(c, m, plan, cfg.random_candidates, cfg.exhaustive_limit, rng);
            const WalshSpectrum greedy_residual = detail::restricted(plan, c, greedy);
            for (double p : cfg.ps) {
                const auto num = detail::norm_of(greedy_residual, p, cfg, derive_seed(seed, salt++));
                std::optional<NormEstimate> best;
                for (const auto& s : sets) {
                    auto r = detail::norm_of(detail::restricted(plan, c, s), p, cfg, derive_seed(seed, salt++));
                    if (!best || r.value < best->value) best = r;
                }
                rec.add(exhaustive ? "almostgreedy" : "almostgreedy:proxy", p, std::int64_t(m), std::int64_t(t),
                        detail::ratio(num, *best));
            }
        }
        return std::move(rec.rows());
    });
    std::vector<ResultRecord> all;
    for (const auto& r : rows) {
        if (r.experiment.starts_with("almostgreedy")) {
            all.push_back(r);
            all.back().experiment = "any";
        }
    }
    detail::summarize(all, "any", "almostgreedy:constant", true, false, cfg.seed);
    for (auto& r : all) if (r.experiment == "almostgreedy:constant") rows.push_back(r);
    return rows;
}

/// The same coefficient sequences realized in the plain Walsh system
/// (c_m attached to W_{m-1}); sup_m ||G_m f||_p / ||f||_p side by side.
inline std::vector<ResultRecord> baseline_walsh_comparison(const ExperimentConfig& cfg) {
    const BlockPlan plan = detail::config_plan(cfg);
    detail::require_ps(cfg);
    const auto corpus = detail::config_corpus(cfg, plan);
    auto walsh_of = [](std::span<const Coefficient> c) {
        std::vector<WalshTerm> terms;
        for (const auto& x : c) terms.push_back({Frequency(Word(x.index - 1)), x.value});
        return WalshSpectrum(std::move(terms));
    };
    auto rows = detail::run_items(corpus.size(), cfg.threads, [&](std::size_t t) {
        const auto& item = corpus[t];
        const std::uint64_t seed = detail::stream_seed(cfg.seed, detail::kTrialStream, t);
        detail::Recorder rec(plan.label(), seed);
        const auto rho = greedy_order(item.coeffs);
        const WalshSpectrum fw = walsh_of(item.coeffs);
        const auto support = std::int64_t(rho.order.size());
        std::uint64_t salt = 0;
        for (double p : cfg.ps) {
            const auto fpsi = detail::norm_of(item.spectrum, p, cfg, derive_seed(seed, salt++));
            const auto fwal = detail::norm_of(fw, p, cfg, derive_seed(seed, salt++));
            detail::Ratio sup_psi{0.0, {}, {}, true}, sup_wal{0.0, {}, {}, true};
            for (auto m : detail::default_sizes(cfg, rho.order.size())) {
                const std::span<const Coefficient> head(rho.order.data(), m);
                const auto gp = detail::ratio(detail::norm_of(combination_spectrum(plan, head), p, cfg, derive_seed(seed, salt++)), fpsi);
                const auto gw = detail::ratio(detail::norm_of(walsh_of(head), p, cfg, derive_seed(seed, salt++)), fwal);
                rec.add("walsh-baseline:psi_curve", p, std::int64_t(m), std::int64_t(t), gp);
                rec.add("walsh-baseline:walsh_curve", p, std::int64_t(m), std::int64_t(t), gw);
                if (gp.value > sup_psi.value) sup_psi = gp;
                if (gw.value > sup_wal.value) sup_wal = gw;
            }
            rec.add("walsh-baseline:psi", p, support, std::int64_t(t), sup_psi);
            rec.add("walsh-baseline:walsh", p, support, std::int64_t(t), sup_wal);
        }
        return std::move(rec.rows());
    });
    detail::summarize(rows, "walsh-baseline:psi", "walsh-baseline:psi_constant", true, false, cfg.seed);
    detail::summarize(rows, "walsh-baseline:walsh", "walsh-baseline:walsh_constant", true, false, cfg.seed);
    return rows;
}

inline std::vector<ResultRecord> run_experiment(ExperimentKind kind, const ExperimentConfig& cfg) {
    switch (kind) {
    case ExperimentKind::democracy: return democracy_experiment(cfg);
    case ExperimentKind::quasigreedy: return quasi_greedy_experiment(cfg);
    case ExperimentKind::partialsum: return partial_sum_experiment(cfg);
    case ExperimentKind::khintchine: return khintchine_experiment(cfg);
    case ExperimentKind::almostgreedy: return almost_greedy_experiment(cfg);
    case ExperimentKind::walsh_baseline: return baseline_walsh_comparison(cfg);
    }
    throw ConfigError("unknown experiment");
}

} // namespace agb
