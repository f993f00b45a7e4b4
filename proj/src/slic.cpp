#include "mslesion/slic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>

namespace msl {

namespace {

void validate_params(const GrayImage& img, const SlicParams& params, const BinaryMask* roi) {
    validate_image(img);
    const std::size_t n = img.size();
    if (params.k < 4 || static_cast<std::size_t>(params.k) > n)
        throw std::invalid_argument("k must be in [4, pixel count]");
    if (params.m < 1.0 || params.m > 20.0)
        throw std::invalid_argument("m must be in [1, 20]");
    if (params.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
    if (roi) {
        if (!roi->same_shape(img)) throw std::invalid_argument("dimension mismatch");
        const std::size_t in_roi = roi->count();
        if (in_roi == 0) throw std::invalid_argument("roi empty");
        if (static_cast<std::size_t>(params.k) > in_roi)
            throw std::invalid_argument("k exceeds pixels in roi");
    }
}

// Eq-style image gradient on the lightness plane, squared central differences
// with clamped coordinates (a=b=0 for grayscale input, so only l contributes).
double gradient_at(const GrayImage& img, int x, int y) {
    auto l = [&](int px, int py) {
        px = std::clamp(px, 0, img.width - 1);
        py = std::clamp(py, 0, img.height - 1);
        return 100.0 * img.at(px, py) / 255.0;
    };
    const double gx = l(x + 1, y) - l(x - 1, y);
    const double gy = l(x, y + 1) - l(x, y - 1);
    return gx * gx + gy * gy;
}

struct Fragment {
    std::uint32_t label;
    std::vector<std::size_t> pixels;
    std::size_t min_index;
};

}  // namespace

double slic_distance(const LabPixel& p, double px, double py, const ClusterCenter& c,
                     double m, double S) {
    const double dl = p.l - c.l, da = p.a - c.a, db = p.b - c.b;
    const double d_lab = std::sqrt(dl * dl + da * da + db * db);
    const double dx = px - c.x, dy = py - c.y;
    const double d_xy = std::sqrt(dx * dx + dy * dy);
    return d_lab + (m / S) * d_xy;
}

namespace {

double distance_for(const SlicParams& params, const LabPixel& p, double px, double py,
                    const ClusterCenter& c, double S) {
    if (!params.squared_distance) return slic_distance(p, px, py, c, params.m, S);
    const double dl = p.l - c.l, da = p.a - c.a, db = p.b - c.b;
    const double d_lab2 = dl * dl + da * da + db * db;
    const double dx = px - c.x, dy = py - c.y;
    const double d_xy2 = dx * dx + dy * dy;
    return std::sqrt(d_lab2 + d_xy2 * (params.m / S) * (params.m / S));
}

}  // namespace

std::vector<ClusterCenter> seed_centers(const GrayImage& img, const SlicParams& params,
                                        const BinaryMask* roi) {
    validate_params(img, params, roi);
    const double S = std::sqrt(static_cast<double>(img.size()) / params.k);
    const auto lab = to_lab(img);

    std::vector<ClusterCenter> centers;
    for (double gy = S / 2.0; gy < img.height; gy += S) {
        for (double gx = S / 2.0; gx < img.width; gx += S) {
            const int sx = std::min(static_cast<int>(std::lround(gx)), img.width - 1);
            const int sy = std::min(static_cast<int>(std::lround(gy)), img.height - 1);
            if (roi && !roi->at(sx, sy)) continue;

            int bx = sx, by = sy;
            double bg = gradient_at(img, sx, sy);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = sx + dx, ny = sy + dy;
                    if (!img.in_bounds(nx, ny)) continue;
                    if (roi && !roi->at(nx, ny)) continue;
                    const double g = gradient_at(img, nx, ny);
                    // strictly lower wins; ties resolved toward the grid
                    // position (the initial best), then lowest row-major index
                    if (g < bg ||
                        (g == bg && !(bx == sx && by == sy) &&
                         static_cast<std::size_t>(ny) * img.width + nx <
                             static_cast<std::size_t>(by) * img.width + bx)) {
                        bg = g;
                        bx = nx;
                        by = ny;
                    }
                }
            }
            const LabPixel p = lab[static_cast<std::size_t>(by) * img.width + bx];
            centers.push_back(ClusterCenter{p.l, p.a, p.b, static_cast<double>(bx),
                                            static_cast<double>(by)});
        }
    }
    return centers;
}

namespace {

// One assignment sweep. Candidates per pixel: every center whose 2S x 2S
// window covers it, plus the pixel's current center, so a pixel never loses
// its label and the step can only lower the objective for fixed centers.
void assign_pixels(const GrayImage& img, const std::vector<LabPixel>& lab,
                   const std::vector<ClusterCenter>& centers, const SlicParams& params, double S,
                   const BinaryMask* roi, std::vector<std::uint32_t>& labels) {
    const std::size_t n = img.size();
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::uint32_t> best_idx(n, kBackgroundLabel);

    for (std::size_t i = 0; i < n; ++i) {
        if (roi && !roi->bits[i]) continue;
        if (labels[i] != kBackgroundLabel) {
            const int x = static_cast<int>(i % img.width);
            const int y = static_cast<int>(i / img.width);
            best[i] = distance_for(params, lab[i], x, y, centers[labels[i]], S);
            best_idx[i] = labels[i];
        }
    }

    const int win = static_cast<int>(std::ceil(S));
    for (std::uint32_t ci = 0; ci < centers.size(); ++ci) {
        const ClusterCenter& c = centers[ci];
        const int x0 = std::max(0, static_cast<int>(std::floor(c.x)) - win);
        const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(c.x)) + win);
        const int y0 = std::max(0, static_cast<int>(std::floor(c.y)) - win);
        const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(c.y)) + win);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
                if (roi && !roi->bits[i]) continue;
                const double d = distance_for(params, lab[i], x, y, c, S);
                if (d < best[i] || (d == best[i] && ci < best_idx[i])) {
                    best[i] = d;
                    best_idx[i] = ci;
                }
            }
        }
    }

    // pixels no window reached (possible with a ragged roi): nearest center overall
    for (std::size_t i = 0; i < n; ++i) {
        if (roi && !roi->bits[i]) continue;
        if (best_idx[i] != kBackgroundLabel) {
            labels[i] = best_idx[i];
            continue;
        }
        const int x = static_cast<int>(i % img.width);
        const int y = static_cast<int>(i / img.width);
        double bd = std::numeric_limits<double>::infinity();
        std::uint32_t bi = 0;
        for (std::uint32_t ci = 0; ci < centers.size(); ++ci) {
            const double d = distance_for(params, lab[i], x, y, centers[ci], S);
            if (d < bd) {
                bd = d;
                bi = ci;
            }
        }
        labels[i] = bi;
    }
}

double total_objective(const GrayImage& img, const std::vector<LabPixel>& lab,
                       const std::vector<ClusterCenter>& centers, const SlicParams& params,
                       double S, const std::vector<std::uint32_t>& labels) {
    double sum = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == kBackgroundLabel) continue;
        const int x = static_cast<int>(i % img.width);
        const int y = static_cast<int>(i / img.width);
        sum += distance_for(params, lab[i], x, y, centers[labels[i]], S);
    }
    return sum;
}

std::vector<Fragment> find_fragments(int width, int height,
                                     const std::vector<std::uint32_t>& labels) {
    const std::size_t n = labels.size();
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<Fragment> fragments;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < n; ++start) {
        if (seen[start] || labels[start] == kBackgroundLabel) continue;
        Fragment frag;
        frag.label = labels[start];
        frag.min_index = start;
        stack.push_back(start);
        seen[start] = 1;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            frag.pixels.push_back(p);
            const int x = static_cast<int>(p % width), y = static_cast<int>(p / width);
            const int nx[4] = {x - 1, x + 1, x, x};
            const int ny[4] = {y, y, y - 1, y + 1};
            for (int d = 0; d < 4; ++d) {
                if (nx[d] < 0 || nx[d] >= width || ny[d] < 0 || ny[d] >= height) continue;
                const std::size_t q = static_cast<std::size_t>(ny[d]) * width + nx[d];
                if (!seen[q] && labels[q] == frag.label) {
                    seen[q] = 1;
                    stack.push_back(q);
                }
            }
        }
        fragments.push_back(std::move(frag));
    }
    return fragments;
}

// Merges orphan fragments into adjacent settled regions so every surviving
// label is 4-connected, then compacts ids to 0..L-1 and recomputes centers.
void enforce_connectivity(const GrayImage& img, const std::vector<LabPixel>& lab,
                          std::vector<std::uint32_t>& labels,
                          std::vector<ClusterCenter>& centers) {
    const int width = img.width, height = img.height;
    auto fragments = find_fragments(width, height, labels);

    // largest fragment per label is the anchor; ties by smallest start index
    std::map<std::uint32_t, std::size_t> anchor;  // label -> fragment index
    for (std::size_t f = 0; f < fragments.size(); ++f) {
        auto it = anchor.find(fragments[f].label);
        if (it == anchor.end()) {
            anchor[fragments[f].label] = f;
            continue;
        }
        const Fragment& cur = fragments[it->second];
        if (fragments[f].pixels.size() > cur.pixels.size() ||
            (fragments[f].pixels.size() == cur.pixels.size() &&
             fragments[f].min_index < cur.min_index))
            it->second = f;
    }

    std::vector<std::uint8_t> settled(labels.size(), 0);
    std::deque<std::size_t> queue;
    std::vector<std::size_t> orphans;
    for (std::size_t f = 0; f < fragments.size(); ++f) {
        if (anchor[fragments[f].label] == f) {
            for (std::size_t p : fragments[f].pixels) settled[p] = 1;
        } else {
            orphans.push_back(f);
        }
    }
    std::sort(orphans.begin(), orphans.end(), [&](std::size_t a, std::size_t b) {
        return fragments[a].min_index < fragments[b].min_index;
    });
    for (std::size_t f : orphans) queue.push_back(f);

    std::uint32_t next_fresh = 0;
    for (const auto& c : fragments) next_fresh = std::max(next_fresh, c.label + 1);

    std::size_t since_progress = 0;
    while (!queue.empty()) {
        if (since_progress >= queue.size()) {
            // enclosed pocket with no settled neighbor: promote the first
            // orphan to a fresh label so the rest can attach to it
            const std::size_t f = queue.front();
            queue.pop_front();
            for (std::size_t p : fragments[f].pixels) {
                labels[p] = next_fresh;
                settled[p] = 1;
            }
            ++next_fresh;
            since_progress = 0;
            continue;
        }
        const std::size_t f = queue.front();
        queue.pop_front();

        std::map<std::uint32_t, std::size_t> votes;
        for (std::size_t p : fragments[f].pixels) {
            const int x = static_cast<int>(p % width), y = static_cast<int>(p / width);
            const int nx[4] = {x - 1, x + 1, x, x};
            const int ny[4] = {y, y, y - 1, y + 1};
            for (int d = 0; d < 4; ++d) {
                if (nx[d] < 0 || nx[d] >= width || ny[d] < 0 || ny[d] >= height) continue;
                const std::size_t q = static_cast<std::size_t>(ny[d]) * width + nx[d];
                if (settled[q] && labels[q] != kBackgroundLabel) ++votes[labels[q]];
            }
        }
        if (votes.empty()) {
            queue.push_back(f);
            ++since_progress;
            continue;
        }
        std::uint32_t winner = votes.begin()->first;
        std::size_t best_votes = votes.begin()->second;
        for (const auto& [lbl, v] : votes) {
            if (v > best_votes) {
                winner = lbl;
                best_votes = v;
            }
        }
        for (std::size_t p : fragments[f].pixels) {
            labels[p] = winner;
            settled[p] = 1;
        }
        since_progress = 0;
    }

    // compact ids and recompute centers from final membership
    std::map<std::uint32_t, std::uint32_t> remap;
    for (std::uint32_t l : labels) {
        if (l == kBackgroundLabel) continue;
        if (!remap.count(l)) remap[l] = 0;
    }
    std::uint32_t next_id = 0;
    for (auto& [old_id, new_id] : remap) new_id = next_id++;

    std::vector<ClusterCenter> new_centers(next_id);
    std::vector<std::size_t> counts(next_id, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == kBackgroundLabel) continue;
        labels[i] = remap[labels[i]];
        const int x = static_cast<int>(i % width), y = static_cast<int>(i / width);
        ClusterCenter& c = new_centers[labels[i]];
        c.l += lab[i].l;
        c.a += lab[i].a;
        c.b += lab[i].b;
        c.x += x;
        c.y += y;
        ++counts[labels[i]];
    }
    for (std::uint32_t l = 0; l < next_id; ++l) {
        const double n = static_cast<double>(counts[l]);
        new_centers[l].l /= n;
        new_centers[l].a /= n;
        new_centers[l].b /= n;
        new_centers[l].x /= n;
        new_centers[l].y /= n;
    }
    centers = std::move(new_centers);
}

}  // namespace

LabelMap segment(const GrayImage& img, const SlicParams& params, const BinaryMask* roi,
                 SegmentTrace* trace) {
    auto centers = seed_centers(img, params, roi);
    if (centers.empty()) throw std::runtime_error("no seeds inside roi");
    const double S = std::sqrt(static_cast<double>(img.size()) / params.k);
    const auto lab = to_lab(img);

    std::vector<std::uint32_t> labels(img.size(), kBackgroundLabel);
    assign_pixels(img, lab, centers, params, S, roi, labels);

    if (trace) *trace = SegmentTrace{};
    double movement = 0;
    int iterations = 0;
    for (int it = 0; it < params.max_iters; ++it) {
        // update: mean labxy over members; empty centers stay put
        std::vector<ClusterCenter> sums(centers.size());
        std::vector<std::size_t> counts(centers.size(), 0);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == kBackgroundLabel) continue;
            const int x = static_cast<int>(i % img.width), y = static_cast<int>(i / img.width);
            ClusterCenter& s = sums[labels[i]];
            s.l += lab[i].l;
            s.a += lab[i].a;
            s.b += lab[i].b;
            s.x += x;
            s.y += y;
            ++counts[labels[i]];
        }
        movement = 0;
        for (std::size_t c = 0; c < centers.size(); ++c) {
            if (counts[c] == 0) continue;
            const double n = static_cast<double>(counts[c]);
            const ClusterCenter updated{sums[c].l / n, sums[c].a / n, sums[c].b / n,
                                        sums[c].x / n, sums[c].y / n};
            const double dl = updated.l - centers[c].l, da = updated.a - centers[c].a,
                         db = updated.b - centers[c].b, dx = updated.x - centers[c].x,
                         dy = updated.y - centers[c].y;
            movement += std::sqrt(dl * dl + da * da + db * db + dx * dx + dy * dy);
            centers[c] = updated;
        }

        if (trace)
            trace->objective_before_assign.push_back(
                total_objective(img, lab, centers, params, S, labels));
        assign_pixels(img, lab, centers, params, S, roi, labels);
        if (trace)
            trace->objective_after_assign.push_back(
                total_objective(img, lab, centers, params, S, labels));

        ++iterations;
        if (movement < params.tol) break;
    }
    if (trace) {
        trace->iterations = iterations;
        trace->final_center_movement = movement;
    }

    enforce_connectivity(img, lab, labels, centers);

    LabelMap lm;
    lm.width = img.width;
    lm.height = img.height;
    lm.labels = std::move(labels);
    lm.centers = std::move(centers);
    lm.interval = S;
    return lm;
}

std::vector<std::uint32_t> prune_superpixels(const LabelMap& lm, const GrayImage& img,
                                             double bright_quantile) {
    if (lm.width != img.width || lm.height != img.height)
        throw std::invalid_argument("dimension mismatch");
    if (bright_quantile < 0.0 || bright_quantile > 1.0)
        throw std::invalid_argument("bright_quantile must be in [0,1]");
    const std::size_t n_labels = lm.n_labels();
    if (n_labels == 0) throw std::runtime_error("nothing survives pruning");

    std::vector<double> mean(n_labels, 0);
    std::vector<std::size_t> count(n_labels, 0);
    std::vector<std::uint8_t> border(n_labels, 0);
    for (int y = 0; y < lm.height; ++y) {
        for (int x = 0; x < lm.width; ++x) {
            const std::uint32_t l = lm.label_at(x, y);
            if (l == kBackgroundLabel) continue;
            mean[l] += img.at(x, y);
            ++count[l];
            if (x == 0 || y == 0 || x == lm.width - 1 || y == lm.height - 1) border[l] = 1;
            // a background 4-neighbor marks the roi boundary
            if ((x > 0 && lm.label_at(x - 1, y) == kBackgroundLabel) ||
                (x + 1 < lm.width && lm.label_at(x + 1, y) == kBackgroundLabel) ||
                (y > 0 && lm.label_at(x, y - 1) == kBackgroundLabel) ||
                (y + 1 < lm.height && lm.label_at(x, y + 1) == kBackgroundLabel))
                border[l] = 1;
        }
    }
    for (std::size_t l = 0; l < n_labels; ++l)
        if (count[l] > 0) mean[l] /= static_cast<double>(count[l]);

    // linear-interpolated quantile of all superpixel means
    std::vector<double> sorted = mean;
    std::sort(sorted.begin(), sorted.end());
    double q;
    if (sorted.size() == 1) {
        q = sorted[0];
    } else {
        const double pos = bright_quantile * static_cast<double>(sorted.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        q = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    }

    // label adjacency over 4-neighbor pixel pairs
    std::vector<std::uint8_t> adj_dropped(n_labels, 0);
    for (int y = 0; y < lm.height; ++y) {
        for (int x = 0; x < lm.width; ++x) {
            const std::uint32_t l = lm.label_at(x, y);
            if (l == kBackgroundLabel) continue;
            auto check = [&](int nx, int ny) {
                if (nx < 0 || nx >= lm.width || ny < 0 || ny >= lm.height) return;
                const std::uint32_t o = lm.label_at(nx, ny);
                if (o != kBackgroundLabel && o != l && border[o]) adj_dropped[l] = 1;
            };
            check(x - 1, y);
            check(x + 1, y);
            check(x, y - 1);
            check(x, y + 1);
        }
    }

    std::vector<std::uint32_t> kept;
    for (std::uint32_t l = 0; l < n_labels; ++l) {
        if (border[l]) continue;
        if (mean[l] > q && adj_dropped[l]) continue;
        kept.push_back(l);
    }
    if (kept.empty()) throw std::runtime_error("nothing survives pruning");
    return kept;
}

}  // namespace msl
