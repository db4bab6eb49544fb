#include "diskfit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "diskfit/imagepipe.hpp"

namespace diskfit {

const char* technique_name(Technique t) {
    switch (t) {
    case Technique::ClosedForm: return "closed_form";
    case Technique::Iterative: return "iterative";
    case Technique::WarmIterative: return "warm_started_iterative";
    }
    return "unknown";
}

namespace {

// splitmix64-style mixing for derived per-trial seeds
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1) + 0xbf58476d1ce4e5b9ULL * (c + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Percentiles percentiles_of(std::vector<double>& values) {
    Percentiles p;
    if (values.empty())
        return p;
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        const double idx = q * (values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(idx);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = idx - lo;
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    p.p25 = at(0.25);
    p.p50 = at(0.50);
    p.p75 = at(0.75);
    return p;
}

struct CellAccum {
    std::vector<double> centre_errors;
    std::vector<double> radius_errors;
    double total_seconds = 0.0;
    long total_iterations = 0;
    std::size_t failures = 0;
};

} // namespace

BenchReport run_benchmark(const BenchConfig& config) {
    if (config.trials < 1)
        throw Error(ErrorCode::InvalidInput, "trials must be >= 1");

    // accumulators keyed by (technique index, lambda index, count index)
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, CellAccum> accum;

    for (std::size_t li = 0; li < config.noise_levels.size(); ++li) {
        const double lambda = config.noise_levels[li];
        for (std::size_t trial = 0; trial < config.trials; ++trial) {
            SynthDiskConfig disk = config.disk;
            disk.noise_lambda = lambda;
            disk.seed = mix_seed(config.seed, li, trial);
            const DiskSample sample = render_disk(disk);

            GradientField field;
            try {
                field = gradient_field(sample.image);
            } catch (const Error&) {
                for (std::size_t ti = 0; ti < config.techniques.size(); ++ti)
                    for (std::size_t ci = 0; ci < config.point_counts.size(); ++ci)
                        ++accum[{ti, li, ci}].failures;
                continue;
            }

            for (std::size_t ci = 0; ci < config.point_counts.size(); ++ci) {
                EdgePointSet points;
                try {
                    points = extract_edge_points(field, config.point_counts[ci],
                                                 mix_seed(disk.seed, 1, ci));
                } catch (const Error&) {
                    for (std::size_t ti = 0; ti < config.techniques.size(); ++ti)
                        ++accum[{ti, li, ci}].failures;
                    continue;
                }

                for (std::size_t ti = 0; ti < config.techniques.size(); ++ti) {
                    CellAccum& cell = accum[{ti, li, ci}];
                    try {
                        CircleFit fit;
                        int iterations = 0;
                        const auto t0 = std::chrono::steady_clock::now();
                        switch (config.techniques[ti]) {
                        case Technique::ClosedForm:
                            fit = fit_closed_form(points, EdgePolarity::Outer);
                            break;
                        case Technique::Iterative: {
                            const FitReport rep = fit_geometric_iterative(
                                points, fit_kasa(points), config.rel_tol, config.max_iter);
                            fit = rep.fit;
                            iterations = rep.iterations;
                            break;
                        }
                        case Technique::WarmIterative: {
                            const FitReport rep = fit_geometric_iterative(
                                points, fit_closed_form(points, EdgePolarity::Outer),
                                config.rel_tol, config.max_iter);
                            fit = rep.fit;
                            iterations = rep.iterations;
                            break;
                        }
                        }
                        const auto t1 = std::chrono::steady_clock::now();
                        cell.total_seconds += std::chrono::duration<double>(t1 - t0).count();
                        cell.total_iterations += iterations;
                        cell.centre_errors.push_back(std::max(std::abs(fit.x0 - sample.truth.x0),
                                                              std::abs(fit.y0 - sample.truth.y0)));
                        cell.radius_errors.push_back(std::abs(fit.r - sample.truth.r));
                    } catch (const Error&) {
                        ++cell.failures;
                    }
                }
            }
        }
    }

    BenchReport report;
    report.config = config;
    for (std::size_t ti = 0; ti < config.techniques.size(); ++ti)
        for (std::size_t li = 0; li < config.noise_levels.size(); ++li)
            for (std::size_t ci = 0; ci < config.point_counts.size(); ++ci) {
                CellAccum& a = accum[{ti, li, ci}];
                BenchCell cell;
                cell.technique = config.techniques[ti];
                cell.noise_lambda = config.noise_levels[li];
                cell.point_count = config.point_counts[ci];
                cell.samples = a.centre_errors.size();
                cell.failures = a.failures;
                if (cell.samples > 0) {
                    cell.mean_fit_seconds = a.total_seconds / cell.samples;
                    cell.mean_iterations =
                        static_cast<double>(a.total_iterations) / cell.samples;
                }
                cell.centre_error = percentiles_of(a.centre_errors);
                cell.radius_error = percentiles_of(a.radius_errors);
                report.cells.push_back(cell);
            }
    return report;
}

std::string report_to_json(const BenchReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["kind"] = "bench_report";
    j["config"] = {
        {"noise_levels", report.config.noise_levels},
        {"point_counts", report.config.point_counts},
        {"trials", report.config.trials},
        {"seed", report.config.seed},
        {"rel_tol", report.config.rel_tol},
        {"max_iter", report.config.max_iter},
        {"width", report.config.disk.width},
        {"height", report.config.disk.height},
        {"r_min", report.config.disk.r_min},
        {"r_max", report.config.disk.r_max},
    };
    j["cells"] = nlohmann::json::array();
    for (const BenchCell& c : report.cells) {
        j["cells"].push_back({
            {"technique", technique_name(c.technique)},
            {"noise_lambda", c.noise_lambda},
            {"point_count", c.point_count},
            {"centre_error", {{"p25", c.centre_error.p25},
                              {"p50", c.centre_error.p50},
                              {"p75", c.centre_error.p75}}},
            {"radius_error", {{"p25", c.radius_error.p25},
                              {"p50", c.radius_error.p50},
                              {"p75", c.radius_error.p75}}},
            {"mean_fit_seconds", c.mean_fit_seconds},
            {"mean_iterations", c.mean_iterations},
            {"samples", c.samples},
            {"failures", c.failures},
        });
    }
    return j.dump(2);
}

namespace {

void append_table(std::ostringstream& out, const BenchReport& report, bool radius) {
    const auto& counts = report.config.point_counts;
    out << (radius ? "Radius error" : "Centre error") << " percentiles [px]\n";
    out << "technique                 lambda |";
    for (std::size_t c : counts) {
        std::ostringstream head;
        head << "  n=" << c << " (p25/p50/p75)";
        out << head.str();
    }
    out << "\n";
    for (const Technique t : report.config.techniques) {
        for (const double lambda : report.config.noise_levels) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%-25s %6.0f |", technique_name(t), lambda);
            out << buf;
            for (std::size_t c : counts) {
                for (const BenchCell& cell : report.cells) {
                    if (cell.technique == t && cell.noise_lambda == lambda &&
                        cell.point_count == c) {
                        const Percentiles& p = radius ? cell.radius_error : cell.centre_error;
                        std::snprintf(buf, sizeof(buf), " %6.2f %6.2f %6.2f", p.p25, p.p50,
                                      p.p75);
                        out << buf;
                    }
                }
            }
            out << "\n";
        }
    }
    out << "\n";
}

} // namespace

std::string report_to_table(const BenchReport& report) {
    std::ostringstream out;
    append_table(out, report, false);
    append_table(out, report, true);
    return out.str();
}

} // namespace diskfit
