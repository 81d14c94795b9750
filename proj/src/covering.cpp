#include "hrst/covering.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hrst/errors.hpp"
#include "hrst/format.hpp"

namespace hrst {
namespace {

constexpr double kPi = std::numbers::pi;

double chord(double angle) { return 2.0 * std::sin(0.5 * std::min(angle, kPi)); }

std::uint64_t cell_key(const std::int64_t* c, std::size_t n) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<std::uint64_t>(c[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

class UnionFind {
  public:
    explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return;
        }
        if (rank_[a] < rank_[b]) {
            std::swap(a, b);
        }
        parent_[b] = a;
        if (rank_[a] == rank_[b]) {
            ++rank_[a];
        }
    }

  private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned char> rank_;
};

std::vector<Direction> equispaced(std::size_t n) {
    std::vector<Direction> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = -kPi + 2.0 * kPi * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        out.push_back(Direction{std::cos(a), std::sin(a)});
    }
    return out;
}

std::vector<Direction> fibonacci_lattice(std::size_t n) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    std::vector<Direction> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(n);
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double a = golden * static_cast<double>(k);
        out.push_back(Direction{rho * std::cos(a), rho * std::sin(a), z});
    }
    return out;
}

// Coverings are deterministic in (r, d), so block graphs share them.
const Covering& cached_covering(int r, int d) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, Covering> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find({r, d});
    if (it == cache.end()) {
        it = cache.emplace(std::pair{r, d}, build_covering(r, d)).first;
    }
    return it->second;
}

}  // namespace

DirectionIndex::DirectionIndex(std::vector<Direction> centers, double max_angle)
    : centers_(std::move(centers)), max_angle_(std::min(max_angle, kPi)) {
    cell_ = std::max(chord(max_angle_), 1e-9);
    for (std::size_t i = 0; i < centers_.size(); ++i) {
        const auto& c = centers_[i];
        std::int64_t coords[8];
        for (std::size_t k = 0; k < c.size(); ++k) {
            coords[k] = static_cast<std::int64_t>(std::floor(c[k] / cell_));
        }
        cells_[cell_key(coords, c.size())].push_back(i);
    }
}

template <class F>
void DirectionIndex::visit_near(const Direction& x, F&& f) const {
    const std::size_t n = x.size();
    if (n > 8) {
        for (std::size_t i = 0; i < centers_.size(); ++i) {
            f(i);
        }
        return;
    }
    std::int64_t base[8];
    for (std::size_t k = 0; k < n; ++k) {
        base[k] = static_cast<std::int64_t>(std::floor(x[k] / cell_));
    }
    std::size_t total = 1;
    for (std::size_t k = 0; k < n; ++k) {
        total *= 3;
    }
    std::int64_t coords[8];
    for (std::size_t m = 0; m < total; ++m) {
        std::size_t rest = m;
        for (std::size_t k = 0; k < n; ++k) {
            coords[k] = base[k] + static_cast<std::int64_t>(rest % 3) - 1;
            rest /= 3;
        }
        const auto it = cells_.find(cell_key(coords, n));
        if (it != cells_.end()) {
            for (std::size_t i : it->second) {
                f(i);
            }
        }
    }
}

std::vector<std::size_t> DirectionIndex::within(const Direction& x, double angle) const {
    if (angle > max_angle_) {
        throw std::invalid_argument("query angle exceeds the index reach");
    }
    std::vector<std::size_t> out;
    visit_near(x, [&](std::size_t i) {
        if (angle_between(x, centers_[i]) <= angle) {
            out.push_back(i);
        }
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::size_t DirectionIndex::count_within(const Direction& x, double angle) const {
    return within(x, angle).size();
}

CoverageCheck check_covering(const Covering& covering, std::size_t samples, RandomStream& rng) {
    const DirectionIndex index(covering.centers, covering.cap_radius);
    CoverageCheck check;
    check.samples = samples;
    for (std::size_t s = 0; s < samples; ++s) {
        const Direction x = random_direction(covering.dim, rng);
        const std::size_t m = index.count_within(x, covering.cap_radius);
        check.max_multiplicity = std::max(check.max_multiplicity, m);
        if (m == 0) {
            if (!check.witness) {
                check.witness = x;
            }
            ++check.uncovered;
        }
    }
    return check;
}

Covering build_covering(double r, int d, std::size_t samples) {
    if (!(r > 0.0)) {
        throw std::invalid_argument("covering level must be positive");
    }
    if (d < 1) {
        throw std::invalid_argument("dimension d must be >= 1");
    }
    Covering cov;
    cov.dim = d;
    cov.level = r;
    cov.cap_radius = std::exp(-r);
    RandomStream rng(SeedDescriptor{std::bit_cast<std::uint64_t>(r), static_cast<std::uint64_t>(d)});
    if (d == 1) {
        cov.centers = equispaced(static_cast<std::size_t>(std::ceil(kPi * std::exp(r))));
        cov.overlap_bound = 3;
        const auto check = check_covering(cov, samples, rng);
        if (check.uncovered > 0 || check.max_multiplicity > 3) {
            throw VerificationError("equispaced covering failed verification");
        }
        return cov;
    }
    // Start from the area count (caps of radius rho have measure ~ rho^d
    // times a constant) and grow until the sampled check passes.
    const double single = cap_measure(cov.cap_radius, d);
    double n = (d == 2 ? 1.3 : 4.0) / single;
    cov.experimental = d >= 3;
    CoverageCheck check;
    for (int attempt = 0; attempt < 12; ++attempt) {
        const auto count = static_cast<std::size_t>(std::ceil(n));
        if (d == 2) {
            cov.centers = fibonacci_lattice(count);
        } else {
            cov.centers.clear();
            for (std::size_t i = 0; i < count; ++i) {
                cov.centers.push_back(random_direction(d, rng));
            }
        }
        check = check_covering(cov, samples, rng);
        if (check.uncovered == 0) {
            cov.overlap_bound = check.max_multiplicity;
            return cov;
        }
        n *= 1.15;
    }
    std::ostringstream msg;
    msg.precision(17);
    msg << "covering at level " << r << " leaves direction (";
    for (std::size_t k = 0; k < check.witness->size(); ++k) {
        msg << (k ? ", " : "") << (*check.witness)[k];
    }
    msg << ") uncovered";
    throw VerificationError(msg.str());
}

std::size_t BlockGraph::bad_count() const {
    return static_cast<std::size_t>(std::count(bad.begin(), bad.end(), 1));
}

std::size_t BlockGraph::largest_component() const {
    std::size_t best = 0;
    for (const auto& c : components) {
        best = std::max(best, c.size());
    }
    return best;
}

std::size_t BlockGraph::max_degree() const {
    return degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
}

double adjacency_angle(int r, int r2, double delta) {
    const int low = std::min(r, r2);
    const double reach =
        delta >= low ? kPi : std::asin(std::min(1.0, std::sinh(delta) / std::sinh(low)));
    return std::min(kPi, std::exp(-r) + std::exp(-r2) + reach);
}

BlockGraph build_block_graph(const RadialTree& tree, double delta, int r_min, int r_max) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("delta must lie in (0, 1)");
    }
    if (r_min < 1 || r_max < r_min) {
        throw std::invalid_argument("need 1 <= r_min <= r_max");
    }
    if (r_max + 1 > tree.cloud().domain_radius) {
        throw std::invalid_argument("blocks must lie inside the sampled ball");
    }
    const int d = tree.dim();
    BlockGraph g;
    g.delta = delta;
    g.level_min = r_min;
    g.level_max = r_max;
    std::vector<const Covering*> coverings;
    std::vector<DirectionIndex> indices;
    std::vector<std::size_t> first_block;
    for (int r = r_min; r <= r_max; ++r) {
        coverings.push_back(&cached_covering(r, d));
        const auto& cov = *coverings.back();
        first_block.push_back(g.blocks.size());
        for (std::size_t m = 0; m < cov.centers.size(); ++m) {
            g.blocks.push_back(Block{r, m});
        }
        const double reach = std::max(cov.cap_radius, adjacency_angle(r, r - 1, delta));
        indices.emplace_back(cov.centers, reach);
    }
    g.bad.assign(g.blocks.size(), 0);
    g.points.assign(g.blocks.size(), 0);
    g.degree.assign(g.blocks.size(), 0);
    for (std::size_t v = 0; v < tree.size(); ++v) {
        const double rv = tree.radius(v);
        if (rv < r_min || rv >= r_max + 1) {
            continue;
        }
        const auto level = static_cast<int>(std::floor(rv));
        const auto li = static_cast<std::size_t>(level - r_min);
        const bool is_bad = tree.ancestor_distance(v) < delta;
        for (std::size_t m : indices[li].within(tree.point(v).direction, coverings[li]->cap_radius)) {
            const std::size_t b = first_block[li] + m;
            ++g.points[b];
            if (is_bad) {
                g.bad[b] = 1;
            }
        }
    }
    for (int r = r_min; r <= r_max; ++r) {
        const auto li = static_cast<std::size_t>(r - r_min);
        for (std::size_t m = 0; m < coverings[li]->centers.size(); ++m) {
            const std::size_t b = first_block[li] + m;
            // Same level and the level below; each pair is visited once.
            for (int r2 : {r, r - 1}) {
                if (r2 < r_min) {
                    continue;
                }
                const auto lj = static_cast<std::size_t>(r2 - r_min);
                const double limit = adjacency_angle(r, r2, delta);
                for (std::size_t m2 : indices[lj].within(coverings[li]->centers[m], limit)) {
                    const std::size_t b2 = first_block[lj] + m2;
                    if (r2 == r && b2 <= b) {
                        continue;
                    }
                    g.edges.emplace_back(std::min(b, b2), std::max(b, b2));
                    ++g.degree[b];
                    ++g.degree[b2];
                }
            }
        }
    }
    std::sort(g.edges.begin(), g.edges.end());
    UnionFind uf(g.blocks.size());
    for (const auto& [a, b] : g.edges) {
        if (g.bad[a] && g.bad[b]) {
            uf.unite(a, b);
        }
    }
    std::map<std::size_t, std::size_t> slot;
    for (std::size_t b = 0; b < g.blocks.size(); ++b) {
        if (!g.bad[b]) {
            continue;
        }
        const auto [it, inserted] = slot.try_emplace(uf.find(b), g.components.size());
        if (inserted) {
            g.components.emplace_back();
        }
        g.components[it->second].push_back(b);
    }
    return g;
}

double block_volume(int r, int d) {
    return annulus_volume(r, r + 1.0, d) * cap_measure(std::exp(-static_cast<double>(r)), d);
}

double bad_probability_bound(double delta, double lambda, int d, double c1) {
    return lambda * c1 * (1.0 - std::exp(-lambda * ball_volume(delta, d)));
}

double estimate_block_constant(int r_min, int r_max, int d, std::size_t samples,
                               RandomStream& rng, double safety) {
    double best = 0.0;
    for (int r = r_min; r <= r_max; ++r) {
        const Region block = Intersection{{Annulus{static_cast<double>(r), r + 1.0},
                                           Cone{unit_axis(d), std::exp(-static_cast<double>(r))}}};
        best = std::max(best, region_volume_mc(block, d, samples, rng).estimate);
    }
    return best * safety;
}

std::vector<ComponentHistogramRow> component_histogram(const BlockGraph& graph) {
    std::map<std::size_t, std::size_t> counts;
    for (const auto& c : graph.components) {
        ++counts[c.size()];
    }
    std::vector<ComponentHistogramRow> rows;
    for (const auto& [size, count] : counts) {
        rows.push_back({graph.delta, graph.level_min, graph.level_max, size, count});
    }
    return rows;
}

std::string histogram_csv(const std::vector<ComponentHistogramRow>& rows) {
    std::ostringstream out;
    out << "delta,levelMin,levelMax,componentSize,count\n";
    for (const auto& row : rows) {
        out << format_double(row.delta) << ',' << row.level_min << ',' << row.level_max << ','
            << row.component_size << ',' << row.count << '\n';
    }
    return out.str();
}

}  // namespace hrst
