#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tieconv {

/// Monotone integer counts indexed by radius (word length m or geodesic
/// length l).
struct GrowthSeries {
    std::vector<double> radii;
    std::vector<long long> counts;
    std::string label;

    /// Checks increasing radii, counts >= 1, monotone counts.
    void validate() const;
};

/// Exhaustive submultiplicativity check N(r+s) <= N(r) N(s) over all
/// tabulated radius pairs whose sum is tabulated (word-growth series).
bool is_submultiplicative(const GrowthSeries& series);

enum class GrowthKind { Polynomial, Exponential, Bounded };

struct GrowthClassification {
    GrowthKind kind = GrowthKind::Bounded;
    double parameter = 0;     // polynomial degree or exponential rate
    double fit_residual = 0;  // sum of squared log residuals of the winning fit
};

/// Ball sizes N(m) = #{z in Z^d : |z|_1 <= m} by breadth-first search over
/// the Cayley graph with generators {+-e_i}. Desk scale: d <= 4, m_max <= 50.
GrowthSeries ball_growth_lattice(int d, int m_max);

/// Ball sizes of the genus-g one-relator surface group in the 4g symmetrized
/// standard generators, elements identified by Dehn-reduced shortlex-minimal
/// geodesic representatives. Desk scale: genus in {2, 3}, m_max <= 8.
GrowthSeries ball_growth_surface_group(int genus, int m_max);

/// Number of geodesic arcs of length in (0, l] from x to y on the flat torus
/// (R/(side Z))^d: lattice vectors z with 0 < |(y - x) + z| <= l. For x == y
/// only nonconstant geodesics are counted. d <= 3.
long long geodesic_count_flat_torus(int d, double side, std::span<const double> x,
                                    std::span<const double> y, double length);

/// Series of the above at integer radii 1, 2, ..., floor(max_length); leading
/// zero-count radii are dropped.
GrowthSeries geodesic_growth_flat_torus(int d, double side, std::span<const double> x,
                                        std::span<const double> y, double max_length);

/// Fit log(count) against log(1+radius) (polynomial) and against radius
/// (exponential) by least squares over the upper half of the series; the
/// smaller residual wins. "Bounded" when the last quartile of counts is
/// constant. Requires >= 5 entries.
GrowthClassification classify_growth(const GrowthSeries& series);

/// Least-squares slope of log(count) vs radius over the upper half of the
/// series; the desk-scale surrogate for the exponential growth rate of
/// geodesic counts. Requires >= 5 entries.
double entropy_estimate(const GrowthSeries& series);

/// Word machinery of the genus-g surface group presentation
/// <a_1 b_1 ... a_g b_g | prod [a_i, b_i]>, exposed for testing. Letters are
/// 0..2g-1 (generators) and 2g..4g-1 (their inverses).
namespace surface_group {

using Word = std::vector<std::int8_t>;

struct Presentation {
    explicit Presentation(int genus);
    int genus;
    int letters;    // 4 * genus
    Word relator;   // length 4 * genus
    int inverse(int letter) const { return (letter + 2 * genus) % letters; }
};

Word free_reduce(const Presentation& p, Word w);

/// Free reduction plus replacement of any subword longer than half a cyclic
/// conjugate of the relator (or its inverse) by the shorter complement,
/// iterated to a fixpoint.
Word dehn_reduce(const Presentation& p, Word w);

/// Word problem: w represents the identity iff Dehn reduction empties it.
bool is_trivial(const Presentation& p, const Word& w);

/// Shortlex-minimal representative among all equal-length Dehn-reduced words
/// reachable by half-relator swaps (canonical per group element).
Word canonical_form(const Presentation& p, const Word& w);

}  // namespace surface_group

}  // namespace tieconv
