#include "tieconv/growth.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_set>

namespace tieconv {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

double ls_slope(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    double xm = 0, ym = 0;
    for (std::size_t i = 0; i < n; ++i) {
        xm += xs[i];
        ym += ys[i];
    }
    xm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (xs[i] - xm) * (ys[i] - ym);
        den += (xs[i] - xm) * (xs[i] - xm);
    }
    return den > 0 ? num / den : 0.0;
}

double ls_residual(std::span<const double> xs, std::span<const double> ys, double slope) {
    const std::size_t n = xs.size();
    double xm = 0, ym = 0;
    for (std::size_t i = 0; i < n; ++i) {
        xm += xs[i];
        ym += ys[i];
    }
    xm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double ssr = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (ym + slope * (xs[i] - xm));
        ssr += r * r;
    }
    return ssr;
}

}  // namespace

void GrowthSeries::validate() const {
    if (radii.size() != counts.size()) fail("GrowthSeries: radii/counts size mismatch");
    if (radii.empty()) fail("GrowthSeries: empty series");
    for (std::size_t i = 0; i + 1 < radii.size(); ++i)
        if (!(radii[i] < radii[i + 1])) fail("GrowthSeries: radii must be strictly increasing");
    if (counts.front() < 1) fail("GrowthSeries: counts must start at >= 1");
    for (std::size_t i = 0; i + 1 < counts.size(); ++i)
        if (counts[i + 1] < counts[i]) fail("GrowthSeries: counts must be nondecreasing");
}

bool is_submultiplicative(const GrowthSeries& series) {
    series.validate();
    const std::size_t n = series.radii.size();
    auto find_radius = [&](double r) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < n; ++i)
            if (series.radii[i] == r) return static_cast<std::ptrdiff_t>(i);
        return -1;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const auto k = find_radius(series.radii[i] + series.radii[j]);
            if (k < 0) continue;
            // compare in floating point to survive products beyond 2^63
            const double lhs = static_cast<double>(series.counts[static_cast<std::size_t>(k)]);
            const double rhs = static_cast<double>(series.counts[i]) *
                               static_cast<double>(series.counts[j]);
            if (lhs > rhs) return false;
        }
    }
    return true;
}

GrowthSeries ball_growth_lattice(int d, int m_max) {
    if (d < 1 || d > 4) fail("ball_growth_lattice: d must be in [1, 4]");
    if (m_max < 0 || m_max > 50) fail("ball_growth_lattice: m_max must be in [0, 50]");

    // pack coordinates in [-m_max, m_max] into 7-bit fields
    const auto pack = [d](const int* z) {
        std::uint64_t code = 0;
        for (int a = 0; a < d; ++a)
            code = (code << 7) | static_cast<std::uint64_t>(z[a] + 64);
        return code;
    };

    std::unordered_set<std::uint64_t> seen;
    std::vector<std::array<int, 4>> frontier;
    {
        std::array<int, 4> origin{0, 0, 0, 0};
        frontier.push_back(origin);
        seen.insert(pack(origin.data()));
    }
    GrowthSeries series;
    series.label = "lattice Z^" + std::to_string(d) + " word balls, generators {+-e_i}";
    series.radii.push_back(0);
    series.counts.push_back(1);

    for (int m = 1; m <= m_max; ++m) {
        std::vector<std::array<int, 4>> next;
        next.reserve(frontier.size() * 2 * static_cast<std::size_t>(d));
        for (const auto& z : frontier) {
            for (int a = 0; a < d; ++a) {
                for (int s : {-1, +1}) {
                    std::array<int, 4> w = z;
                    w[static_cast<std::size_t>(a)] += s;
                    if (seen.insert(pack(w.data())).second) next.push_back(w);
                }
            }
        }
        frontier = std::move(next);
        series.radii.push_back(m);
        series.counts.push_back(static_cast<long long>(seen.size()));
    }
    series.validate();
    return series;
}

// ---------------------------------------------------------------------------
// Surface groups
// ---------------------------------------------------------------------------

namespace surface_group {

Presentation::Presentation(int g) : genus(g), letters(4 * g) {
    if (g < 2) throw std::invalid_argument("surface group genus must be >= 2");
    // prod_i a_i b_i a_i^-1 b_i^-1
    for (int i = 0; i < g; ++i) {
        const std::int8_t a = static_cast<std::int8_t>(2 * i);
        const std::int8_t b = static_cast<std::int8_t>(2 * i + 1);
        relator.push_back(a);
        relator.push_back(b);
        relator.push_back(static_cast<std::int8_t>(inverse(a)));
        relator.push_back(static_cast<std::int8_t>(inverse(b)));
    }
}

namespace {

constexpr int kMaxWord = 15;  // packed words carry at most 15 letters

struct InlineWord {
    std::int8_t len = 0;
    std::int8_t a[kMaxWord + 1] = {};
};

InlineWord to_inline(const Word& w) {
    if (w.size() > kMaxWord) fail("surface group word too long");
    InlineWord out;
    out.len = static_cast<std::int8_t>(w.size());
    std::memcpy(out.a, w.data(), w.size());
    return out;
}

Word to_word(const InlineWord& w) { return Word(w.a, w.a + w.len); }

// Shortlex-compatible packing: length in the top 4 bits, letters (offset by
// one) in consecutive 4-bit fields from the most significant end.
std::uint64_t pack(const InlineWord& w) {
    std::uint64_t code = static_cast<std::uint64_t>(w.len) << 60;
    for (int i = 0; i < w.len; ++i)
        code |= static_cast<std::uint64_t>(w.a[i] + 1) << (56 - 4 * i);
    return code;
}

InlineWord unpack(std::uint64_t code) {
    InlineWord w;
    w.len = static_cast<std::int8_t>(code >> 60);
    for (int i = 0; i < w.len; ++i)
        w.a[i] = static_cast<std::int8_t>(((code >> (56 - 4 * i)) & 0xF) - 1);
    return w;
}

struct Rewrite {
    InlineWord pattern;
    InlineWord replacement;
};

// Precomputed rewrite tables for one presentation.
struct Tables {
    Presentation pres;
    std::vector<Rewrite> reductions;  // patterns longer than half the relator, longest first
    std::vector<Rewrite> swaps;       // patterns of exactly half the relator

    explicit Tables(int genus) : pres(genus) {
        const int rl = 4 * genus;
        const int half = rl / 2;
        Word rel = pres.relator;
        Word inv(rel.size());
        for (std::size_t i = 0; i < rel.size(); ++i)
            inv[i] = static_cast<std::int8_t>(pres.inverse(rel[rel.size() - 1 - i]));

        auto add = [&](std::vector<Rewrite>& dst, const Word& rot, int p) {
            Word pat(rot.begin(), rot.begin() + p);
            Word rep(static_cast<std::size_t>(rl - p));
            for (int i = 0; i < rl - p; ++i)
                rep[static_cast<std::size_t>(i)] =
                    static_cast<std::int8_t>(pres.inverse(rot[static_cast<std::size_t>(rl - 1 - i)]));
            for (const auto& r : dst)
                if (r.pattern.len == static_cast<int>(pat.size()) &&
                    std::memcmp(r.pattern.a, pat.data(), pat.size()) == 0)
                    return;
            dst.push_back({to_inline(pat), to_inline(rep)});
        };

        for (const Word* base : {&rel, &inv}) {
            for (int rot = 0; rot < rl; ++rot) {
                Word rotated(base->begin() + rot, base->end());
                rotated.insert(rotated.end(), base->begin(), base->begin() + rot);
                for (int p = rl - 1; p > half; --p) add(reductions, rotated, p);
                add(swaps, rotated, half);
            }
        }
        std::stable_sort(reductions.begin(), reductions.end(),
                         [](const Rewrite& x, const Rewrite& y) {
                             return x.pattern.len > y.pattern.len;
                         });
    }
};

const Tables& tables_for(int genus) {
    static const Tables g2(2);
    static const Tables g3(3);
    if (genus == 2) return g2;
    if (genus == 3) return g3;
    fail("surface group tables only built for genus 2 and 3");
}

void free_reduce_inline(const Presentation& p, InlineWord& w) {
    std::int8_t out[kMaxWord + 1];
    int top = 0;
    for (int i = 0; i < w.len; ++i) {
        if (top > 0 && out[top - 1] == p.inverse(w.a[i]))
            --top;
        else
            out[top++] = w.a[i];
    }
    std::memcpy(w.a, out, static_cast<std::size_t>(top));
    w.len = static_cast<std::int8_t>(top);
}

bool match_at(const InlineWord& w, int pos, const InlineWord& pat) {
    if (pos + pat.len > w.len) return false;
    return std::memcmp(w.a + pos, pat.a, static_cast<std::size_t>(pat.len)) == 0;
}

void splice(InlineWord& w, int pos, int cut, const InlineWord& rep) {
    std::int8_t out[2 * kMaxWord];
    int top = 0;
    for (int i = 0; i < pos; ++i) out[top++] = w.a[i];
    for (int i = 0; i < rep.len; ++i) out[top++] = rep.a[i];
    for (int i = pos + cut; i < w.len; ++i) out[top++] = w.a[i];
    if (top > kMaxWord) fail("surface group word overflow during rewrite");
    std::memcpy(w.a, out, static_cast<std::size_t>(top));
    w.len = static_cast<std::int8_t>(top);
}

void dehn_reduce_inline(const Tables& t, InlineWord& w) {
    free_reduce_inline(t.pres, w);
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : t.reductions) {  // longest patterns first
            for (int pos = 0; pos + r.pattern.len <= w.len; ++pos) {
                if (match_at(w, pos, r.pattern)) {
                    splice(w, pos, r.pattern.len, r.replacement);
                    free_reduce_inline(t.pres, w);
                    changed = true;
                    break;
                }
            }
            if (changed) break;
        }
    }
}

// Canonical code: shortlex minimum over the closure of the Dehn-reduced word
// under equal-length half-relator swaps. A swap that shortens the word (after
// free reduction) restarts the search from the shorter representative.
std::uint64_t canonical_code(const Tables& t, InlineWord w) {
    dehn_reduce_inline(t, w);
restart:
    std::uint64_t best = pack(w);
    // tiny closed set; linear membership is fine
    std::vector<std::uint64_t> seen{best};
    std::vector<InlineWord> stack{w};
    while (!stack.empty()) {
        InlineWord u = stack.back();
        stack.pop_back();
        for (const auto& r : t.swaps) {
            for (int pos = 0; pos + r.pattern.len <= u.len; ++pos) {
                if (!match_at(u, pos, r.pattern)) continue;
                InlineWord v = u;
                splice(v, pos, r.pattern.len, r.replacement);
                free_reduce_inline(t.pres, v);
                if (v.len < w.len) {
                    dehn_reduce_inline(t, v);
                    w = v;
                    goto restart;
                }
                const std::uint64_t code = pack(v);
                if (std::find(seen.begin(), seen.end(), code) == seen.end()) {
                    seen.push_back(code);
                    stack.push_back(v);
                    if (code < best) best = code;
                    if (seen.size() > 4096)
                        fail("surface group canonicalization closure exploded");
                }
            }
        }
    }
    return best;
}

}  // namespace

Word free_reduce(const Presentation& p, Word w) {
    InlineWord iw = to_inline(w);
    free_reduce_inline(p, iw);
    return to_word(iw);
}

Word dehn_reduce(const Presentation& p, Word w) {
    const Tables& t = tables_for(p.genus);
    InlineWord iw = to_inline(w);
    dehn_reduce_inline(t, iw);
    return to_word(iw);
}

bool is_trivial(const Presentation& p, const Word& w) {
    return dehn_reduce(p, w).empty();
}

Word canonical_form(const Presentation& p, const Word& w) {
    const Tables& t = tables_for(p.genus);
    return to_word(unpack(canonical_code(t, to_inline(w))));
}

}  // namespace surface_group

GrowthSeries ball_growth_surface_group(int genus, int m_max) {
    if (genus != 2 && genus != 3) fail("ball_growth_surface_group: genus must be 2 or 3");
    if (m_max < 0 || m_max > 8) fail("ball_growth_surface_group: m_max must be in [0, 8]");

    using namespace surface_group;
    const auto& t = tables_for(genus);
    const int letters = t.pres.letters;

    std::vector<std::uint64_t> cumulative{0};  // identity
    std::vector<std::uint64_t> frontier{0};

    GrowthSeries series;
    series.label = "surface group genus " + std::to_string(genus) + " word balls";
    series.radii.push_back(0);
    series.counts.push_back(1);

    for (int m = 1; m <= m_max; ++m) {
        std::vector<std::uint64_t> candidates;
        candidates.reserve(frontier.size() * static_cast<std::size_t>(letters));
        for (std::uint64_t code : frontier) {
            const InlineWord w = unpack(code);
            for (int g = 0; g < letters; ++g) {
                // appending the inverse of the last letter lands on a shorter,
                // already-counted element
                if (w.len > 0 && w.a[w.len - 1] == t.pres.inverse(g)) continue;
                InlineWord c = w;
                c.a[c.len] = static_cast<std::int8_t>(g);
                ++c.len;
                candidates.push_back(canonical_code(t, c));
            }
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        std::vector<std::uint64_t> fresh;
        fresh.reserve(candidates.size());
        std::set_difference(candidates.begin(), candidates.end(), cumulative.begin(),
                            cumulative.end(), std::back_inserter(fresh));

        std::vector<std::uint64_t> merged;
        merged.reserve(cumulative.size() + fresh.size());
        std::merge(cumulative.begin(), cumulative.end(), fresh.begin(), fresh.end(),
                   std::back_inserter(merged));
        cumulative = std::move(merged);
        frontier = std::move(fresh);

        series.radii.push_back(m);
        series.counts.push_back(static_cast<long long>(cumulative.size()));
    }
    series.validate();
    return series;
}

// ---------------------------------------------------------------------------
// Flat torus geodesic counting
// ---------------------------------------------------------------------------

long long geodesic_count_flat_torus(int d, double side, std::span<const double> x,
                                    std::span<const double> y, double length) {
    if (d < 1 || d > 3) fail("geodesic_count_flat_torus: d must be in [1, 3]");
    if (!(side > 0)) fail("geodesic_count_flat_torus: side must be positive");
    if (length < 0) fail("geodesic_count_flat_torus: negative length");
    if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
        fail("geodesic_count_flat_torus: point dimension mismatch");

    double off[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) off[a] = y[a] - x[a];

    long long lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
        lo[a] = static_cast<long long>(std::floor((-length - off[a]) / side));
        hi[a] = static_cast<long long>(std::ceil((length - off[a]) / side));
    }
    long long count = 0;
    long long z[3] = {lo[0], d > 1 ? lo[1] : 0, d > 2 ? lo[2] : 0};
    while (true) {
        double n2 = 0;
        for (int a = 0; a < d; ++a) {
            const double v = off[a] + side * static_cast<double>(z[a]);
            n2 += v * v;
        }
        // the z = 0, x = y term is the constant path, not a geodesic arc
        if (n2 > 0 && std::sqrt(n2) <= length) ++count;
        int a = d - 1;
        for (; a >= 0; --a) {
            if (++z[a] <= hi[a]) break;
            z[a] = lo[a];
        }
        if (a < 0) break;
    }
    return count;
}

GrowthSeries geodesic_growth_flat_torus(int d, double side, std::span<const double> x,
                                        std::span<const double> y, double max_length) {
    if (!(max_length >= 1)) fail("geodesic_growth_flat_torus: max_length must be >= 1");
    GrowthSeries series;
    series.label = "flat torus geodesic counts, d=" + std::to_string(d);
    for (int l = 1; l <= static_cast<int>(std::floor(max_length)); ++l) {
        const long long c = geodesic_count_flat_torus(d, side, x, y, static_cast<double>(l));
        if (c == 0 && series.counts.empty()) continue;  // drop leading zeros
        series.radii.push_back(l);
        series.counts.push_back(c);
    }
    if (series.counts.empty())
        fail("geodesic_growth_flat_torus: no geodesics within max_length");
    series.validate();
    return series;
}

// ---------------------------------------------------------------------------
// Fits
// ---------------------------------------------------------------------------

GrowthClassification classify_growth(const GrowthSeries& series) {
    series.validate();
    const std::size_t n = series.radii.size();
    if (n < 5) fail("classify_growth: need at least 5 entries");

    // bounded: the last quartile of counts is constant
    const std::size_t quart = n - (n + 3) / 4;
    bool constant_tail = true;
    for (std::size_t i = quart; i < n; ++i)
        if (series.counts[i] != series.counts[quart]) constant_tail = false;
    if (constant_tail) return {GrowthKind::Bounded, 0.0, 0.0};

    const std::size_t lo = n / 2;
    std::vector<double> log_counts, log_radii, radii;
    for (std::size_t i = lo; i < n; ++i) {
        log_counts.push_back(std::log(static_cast<double>(series.counts[i])));
        log_radii.push_back(std::log1p(series.radii[i]));
        radii.push_back(series.radii[i]);
    }
    const double degree = ls_slope(log_radii, log_counts);
    const double poly_ssr = ls_residual(log_radii, log_counts, degree);
    const double rate = ls_slope(radii, log_counts);
    const double exp_ssr = ls_residual(radii, log_counts, rate);

    if (exp_ssr < poly_ssr && rate > 0) return {GrowthKind::Exponential, rate, exp_ssr};
    return {GrowthKind::Polynomial, std::max(degree, 0.0), poly_ssr};
}

double entropy_estimate(const GrowthSeries& series) {
    series.validate();
    const std::size_t n = series.radii.size();
    if (n < 5) fail("entropy_estimate: need at least 5 entries");
    const std::size_t lo = n / 2;
    std::vector<double> log_counts, radii;
    for (std::size_t i = lo; i < n; ++i) {
        log_counts.push_back(std::log(static_cast<double>(series.counts[i])));
        radii.push_back(series.radii[i]);
    }
    return ls_slope(radii, log_counts);
}

}  // namespace tieconv
