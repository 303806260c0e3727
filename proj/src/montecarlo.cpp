#include "pexp/montecarlo.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>
#include <thread>

#include "pexp/estimands.hpp"

namespace pexp {

namespace {

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PEXP_THREADS")) {
        long v = std::atol(env);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace

void Scenario::validate() const {
    population.validate();
    prices.validate();
    if (replications < 1) throw input_error("scenario needs at least one replication");
    if (prices.n_sectors != population.n_sectors)
        throw input_error("scenario price spec and population disagree on S");
    if (estimator.kind != FitKind::two_sls)
        throw input_error("monte carlo scenarios study the stacked two_sls estimator");
    if (methods.empty()) throw input_error("scenario needs at least one variance method");
}

MCReport run_scenario(const Scenario& scenario, std::vector<ReplicationRecord>* per_replication) {
    scenario.validate();
    const auto start = std::chrono::steady_clock::now();

    // The population is frozen once; replications redraw prices only.
    FinitePopulation pop = draw_population(scenario.population, scenario.master_seed);
    EstimandDecomposition target = pop.gamma ? iv_estimand_ge(pop, scenario.prices)
                                             : iv_estimand(pop, scenario.prices);

    const std::size_t n_reps = scenario.replications;
    const std::size_t n_methods = scenario.methods.size();
    std::vector<ReplicationRecord> records(n_reps);

    auto run_one = [&](std::size_t r) {
        ReplicationRecord& rec = records[r];
        rec.replication = r;
        rec.std_errors.assign(n_methods, 0.0);
        try {
            PriceSystem prices = draw_prices(scenario.prices, scenario.population.n_periods,
                                             scenario.master_seed, stream::replication(r));
            GeneratedPanel generated = generate_panel(pop, prices);
            FitResult fit = fit_2sls(generated.panel, prices, scenario.estimator);
            rec.beta_hat = fit.coefficient;
            for (std::size_t m = 0; m < n_methods; ++m) {
                switch (scenario.methods[m]) {
                    case VarianceMethod::ehw:
                        rec.std_errors[m] = ehw_variance(fit).std_error;
                        break;
                    case VarianceMethod::price_exposure:
                        rec.std_errors[m] = pe_variance(fit).std_error;
                        break;
                    case VarianceMethod::cluster_region:
                        rec.std_errors[m] =
                            cluster_variance(fit, generated.panel, ClusterBy::region).std_error;
                        break;
                    case VarianceMethod::cluster_time:
                        rec.std_errors[m] =
                            cluster_variance(fit, generated.panel, ClusterBy::time).std_error;
                        break;
                }
            }
        } catch (const degenerate_error&) {
            rec.excluded = true;
        }
    };

    const std::size_t n_threads = std::min(resolve_threads(scenario.threads), n_reps);
    if (n_threads <= 1) {
        for (std::size_t r = 0; r < n_reps; ++r) run_one(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (std::size_t w = 0; w < n_threads; ++w) {
            workers.emplace_back([&] {
                for (std::size_t r = next.fetch_add(1); r < n_reps; r = next.fetch_add(1))
                    run_one(r);
            });
        }
        for (auto& worker : workers) worker.join();
    }

    // Fixed-order reduction keeps the report independent of the thread count.
    MCReport report;
    report.scenario_name = scenario.name;
    report.n_regions = scenario.population.n_regions;
    report.n_periods = scenario.population.n_periods;
    report.n_sectors = scenario.population.n_sectors;
    report.replications = n_reps;
    report.master_seed = scenario.master_seed;
    report.estimand = target.total;

    KahanSum bias_sum;
    std::vector<KahanSum> se_sums(n_methods);
    std::vector<std::size_t> covered(n_methods, 0), covered_unit(n_methods, 0);
    std::size_t used = 0;
    for (std::size_t r = 0; r < n_reps; ++r) {
        const ReplicationRecord& rec = records[r];
        if (rec.excluded) {
            ++report.excluded;
            continue;
        }
        ++used;
        bias_sum.add(rec.beta_hat - target.total);
        for (std::size_t m = 0; m < n_methods; ++m) {
            double se = rec.std_errors[m];
            se_sums[m].add(se);
            double half = kCritical95 * se;
            if (std::abs(rec.beta_hat - target.total) <= half) ++covered[m];
            if (std::abs(rec.beta_hat - 1.0) <= half) ++covered_unit[m];
        }
    }
    if (used == 0) throw degenerate_error("every replication was excluded");
    if (static_cast<double>(report.excluded) / static_cast<double>(n_reps) >= 0.001)
        throw degenerate_error("excluded " + std::to_string(report.excluded) + " of " +
                               std::to_string(n_reps) +
                               " replications (>= 0.1%); the design is too close to degenerate");

    report.mean_bias = bias_sum.value() / static_cast<double>(used);
    report.mean_bias_vs_unit = report.mean_bias + (target.total - 1.0);
    for (std::size_t m = 0; m < n_methods; ++m) {
        MethodSummary summary;
        summary.method = scenario.methods[m];
        summary.mean_se = se_sums[m].value() / static_cast<double>(used);
        summary.coverage = static_cast<double>(covered[m]) / static_cast<double>(used);
        summary.coverage_vs_unit =
            static_cast<double>(covered_unit[m]) / static_cast<double>(used);
        summary.coverage_mc_se =
            std::sqrt(summary.coverage * (1.0 - summary.coverage) / static_cast<double>(used));
        report.methods.push_back(summary);
    }
    if (scenario.population.n_periods == 1)
        report.annotation = "single-period design: time-aggregated asymptotics do not apply";

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (per_replication) *per_replication = std::move(records);
    return report;
}

std::vector<MCReport> run_table(const std::vector<Scenario>& rows) {
    if (rows.empty()) throw input_error("scenario table is empty");
    std::vector<MCReport> reports;
    reports.reserve(rows.size());
    for (const auto& row : rows) reports.push_back(run_scenario(row));
    return reports;
}

std::string format_table(const std::vector<MCReport>& reports) {
    if (reports.empty()) return "";
    std::ostringstream out;
    out << std::left << std::setw(22) << "Scenario" << std::right << std::setw(12) << "Mean Bias";
    for (const auto& m : reports.front().methods)
        out << std::setw(20) << (std::string("SE ") + to_string(m.method));
    for (const auto& m : reports.front().methods)
        out << std::setw(20) << (std::string("Cov ") + to_string(m.method));
    out << std::setw(8) << "Excl" << std::setw(8) << "Secs" << "\n";

    out << std::fixed;
    for (const auto& r : reports) {
        std::string label = r.scenario_name.empty()
                                ? "N=" + std::to_string(r.n_regions) +
                                      ",T=" + std::to_string(r.n_periods)
                                : r.scenario_name;
        out << std::left << std::setw(22) << label << std::right << std::setw(12)
            << std::setprecision(4) << r.mean_bias;
        for (const auto& m : r.methods) out << std::setw(20) << std::setprecision(4) << m.mean_se;
        for (const auto& m : r.methods) out << std::setw(20) << std::setprecision(3) << m.coverage;
        out << std::setw(8) << r.excluded << std::setw(8) << std::setprecision(1)
            << r.wall_seconds << "\n";
        if (!r.annotation.empty()) out << "    note: " << r.annotation << "\n";
    }
    return out.str();
}

}  // namespace pexp
