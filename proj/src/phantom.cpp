#include "mslesion/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "mslesion/image_io.hpp"
#include "mslesion/parallel.hpp"
#include "mslesion/rng.hpp"

namespace msl {

namespace {

void validate_spec(const PhantomSpec& spec) {
    if (spec.size < 64) throw std::invalid_argument("size must be >= 64");
    if (spec.n_lesion < 0 || spec.n_healthy < 0) throw std::invalid_argument("negative case count");
    if (spec.lesion_count_min < 1 || spec.lesion_count_max < spec.lesion_count_min)
        throw std::invalid_argument("bad lesion count range");
    if (spec.lesion_radius_min < 1 || spec.lesion_radius_max < spec.lesion_radius_min)
        throw std::invalid_argument("bad lesion radius range");
    if (!(spec.lesion_mean > spec.gm_mean && spec.gm_mean > spec.wm_mean))
        throw std::invalid_argument("tissue means must satisfy lesion > gray > white");
    if (spec.noise_sigma < 0) throw std::invalid_argument("negative noise sigma");
}

PhantomCase make_case(const PhantomSpec& spec, int id, bool lesion) {
    DetRng rng(mix_seed(spec.seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(id) + 1))));
    const int size = spec.size;
    const double cx = size / 2.0, cy = size / 2.0;

    // semi-axes ~0.4*size with +-10% jitter
    const double ax = 0.4 * size * rng.uniform(0.9, 1.1);
    const double ay = 0.4 * size * rng.uniform(0.9, 1.1);
    const double amin = std::min(ax, ay);
    const int skull_w = rng.uniform_int(3) + 2;  // ring width 2..4
    // dark CSF-like gap between brain and skull, so thresholding leaves the
    // ring disconnected and extraction can actually strip it
    const double gap = 3.0;

    // smooth tissue field parameters
    const double fx = rng.uniform(0.5, 1.5), px = rng.uniform(0.0, 1.0);
    const double fy = rng.uniform(0.5, 1.5), py = rng.uniform(0.0, 1.0);

    PhantomCase pc;
    pc.id = id;
    pc.lesion = lesion;
    pc.truth = BinaryMask(size, size);

    GrayImage img(size, size);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double rho = std::sqrt(((x - cx) / ax) * ((x - cx) / ax) +
                                         ((y - cy) / ay) * ((y - cy) / ay));
            double v;
            if (rho <= 1.0) {
                const double s = 0.5 + 0.5 * std::sin(two_pi * (fx * x / size + px)) *
                                           std::cos(two_pi * (fy * y / size + py));
                v = spec.wm_mean + (spec.gm_mean - spec.wm_mean) * s;
            } else if (rho <= (amin + gap) / amin) {
                v = spec.bg_mean;
            } else if (rho <= (amin + gap + skull_w) / amin) {
                v = spec.skull_mean;
            } else {
                v = spec.bg_mean;
            }
            img.at(x, y) = v;
        }
    }

    if (lesion) {
        // brain area for the lesion budget (at most 5% of it)
        long brain_px = 0;
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double rho = std::sqrt(((x - cx) / ax) * ((x - cx) / ax) +
                                             ((y - cy) / ay) * ((y - cy) / ay));
                if (rho <= 1.0) ++brain_px;
            }
        const long budget = static_cast<long>(0.05 * static_cast<double>(brain_px));

        if (spec.lesion_radius_min >= 0.9 * amin)
            throw std::invalid_argument("lesion radius exceeding brain axes");

        const int want = spec.lesion_count_min +
                         rng.uniform_int(spec.lesion_count_max - spec.lesion_count_min + 1);
        long placed_px = 0;
        for (int li = 0; li < want; ++li) {
            int radius = spec.lesion_radius_min +
                         rng.uniform_int(spec.lesion_radius_max - spec.lesion_radius_min + 1);
            // shrink toward the minimum radius to respect the area budget; the
            // first disc is always placed so truth is never empty
            while (radius > spec.lesion_radius_min &&
                   placed_px + static_cast<long>(std::numbers::pi * radius * radius) > budget)
                --radius;
            while (radius >= 0.9 * amin) --radius;
            if (radius < spec.lesion_radius_min)
                throw std::invalid_argument("lesion radius exceeding brain axes");

            // center such that the disc stays strictly inside the ellipse
            const double rho_cap = 0.9 - radius / amin;
            double lx = cx, ly = cy;
            bool ok = false;
            for (int attempt = 0; attempt < 1000; ++attempt) {
                lx = rng.uniform(cx - ax, cx + ax);
                ly = rng.uniform(cy - ay, cy + ay);
                const double rho = std::sqrt(((lx - cx) / ax) * ((lx - cx) / ax) +
                                             ((ly - cy) / ay) * ((ly - cy) / ay));
                if (rho <= rho_cap) {
                    ok = true;
                    break;
                }
            }
            if (!ok) throw std::invalid_argument("lesion radius exceeding brain axes");

            const int x0 = std::max(0, static_cast<int>(std::floor(lx - radius)));
            const int x1 = std::min(size - 1, static_cast<int>(std::ceil(lx + radius)));
            const int y0 = std::max(0, static_cast<int>(std::floor(ly - radius)));
            const int y1 = std::min(size - 1, static_cast<int>(std::ceil(ly + radius)));
            const double r2 = static_cast<double>(radius) * radius;
            long fresh = 0;
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double dx = x - lx, dy = y - ly;
                    if (dx * dx + dy * dy <= r2 && !pc.truth.at(x, y)) ++fresh;
                }
            if (pc.lesion_count > 0 && placed_px + fresh > budget) break;
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double dx = x - lx, dy = y - ly;
                    if (dx * dx + dy * dy <= r2) {
                        img.at(x, y) = spec.lesion_mean;
                        if (!pc.truth.at(x, y)) {
                            pc.truth.set(x, y, true);
                            ++placed_px;
                        }
                    }
                }
            ++pc.lesion_count;
        }
    }

    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double v = img.at(x, y);
            if (spec.noise_sigma > 0) v += spec.noise_sigma * rng.normal();
            img.at(x, y) = std::clamp(std::round(v), 0.0, 255.0);
        }
    pc.image = std::move(img);
    return pc;
}

}  // namespace

std::vector<PhantomCase> generate_phantom(const PhantomSpec& spec) {
    validate_spec(spec);
    const int total = spec.n_lesion + spec.n_healthy;
    std::vector<PhantomCase> cases(total);
    parallel_for(static_cast<std::size_t>(total), [&](std::size_t i) {
        const int id = static_cast<int>(i);
        cases[i] = make_case(spec, id, id < spec.n_lesion);
    });
    return cases;
}

void export_phantom(const std::vector<PhantomCase>& cases, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    std::ofstream manifest(base / "manifest.csv", std::ios::binary);
    if (!manifest) throw std::runtime_error("cannot open " + (base / "manifest.csv").string());
    manifest << "id,label,lesions\n";
    for (const PhantomCase& pc : cases) {
        const std::string id = std::to_string(pc.id);
        save_pgm(pc.image, (base / ("case_" + id + ".pgm")).string());
        GrayImage truth(pc.truth.width, pc.truth.height);
        for (int y = 0; y < pc.truth.height; ++y)
            for (int x = 0; x < pc.truth.width; ++x)
                truth.at(x, y) = pc.truth.at(x, y) ? 255.0 : 0.0;
        save_pgm(truth, (base / ("truth_" + id + ".pgm")).string());
        manifest << pc.id << ',' << (pc.lesion ? "lesion" : "healthy") << ',' << pc.lesion_count
                 << '\n';
    }
}

}  // namespace msl
