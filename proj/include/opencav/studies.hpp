#pragma once

#include <string>
#include <utility>
#include <vector>

#include "opencav/config.hpp"
#include "opencav/scattering.hpp"

namespace opencav {

struct SweepResult {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    // Leading comment lines of the CSV, in order.
    std::vector<std::pair<std::string, std::string>> metadata;
    // Not written by export_csv: files must not depend on timing.
    double wall_seconds = 0.0;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    const std::vector<double>& column(const std::string& name) const;
    void add_column(std::string name, std::vector<double> values);
    std::string meta(const std::string& key) const;
};

/// 0 requests std::thread::hardware_concurrency().
struct RunOptions {
    unsigned threads = 0;
};

SweepResult run_transmit_study(const RunConfig& cfg, const RunOptions& opts = {});
SweepResult run_rigidity_study(const RunConfig& cfg, const RunOptions& opts = {});
SweepResult run_delay_study(const RunConfig& cfg, const RunOptions& opts = {});
SweepResult run_crossover_study(const RunConfig& cfg, const RunOptions& opts = {});
SweepResult run_trapping_study(const RunConfig& cfg, const RunOptions& opts = {});
/// Minimizer path plus the located point in the metadata. Raises NotFound
/// after filling `partial` when the pair does not coalesce.
SweepResult run_ep_study(const RunConfig& cfg, const RunOptions& opts = {}, SweepResult* partial = nullptr);

SweepResult run_study(const RunConfig& cfg, const RunOptions& opts = {});

/// Local maxima of |t| above 0.5 on an ordered grid.
int count_peaks(const std::vector<double>& abs_t);

/// Fraction of the total width carried by the two broadest states.
double top_two_width_fraction(const std::vector<double>& widths);

/// Renders the CSV text exactly as export_csv writes it.
std::string to_csv(const SweepResult& result);
void export_csv(const SweepResult& result, const std::string& path);

}  // namespace opencav
