#include "opencav/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace opencav {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

unsigned worker_count(const RunOptions& opts, std::size_t work) {
    unsigned n = opts.threads != 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, work)));
}

// fn(i) for i in [0, n); results land in slot i, so the output never depends
// on how indices are spread over workers.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, const RunOptions& opts, F&& fn) {
    std::vector<T> out(n);
    const unsigned workers = worker_count(opts, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::exception_ptr failure;
    std::mutex failure_lock;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    out[i] = fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_lock);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<std::string> base_names(std::initializer_list<const char*> names) { return {names.begin(), names.end()}; }

SweepResult from_rows(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows) {
    SweepResult r;
    for (std::size_t c = 0; c < names.size(); ++c) {
        std::vector<double> col(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i][c];
        r.add_column(names[c], std::move(col));
    }
    return r;
}

void stamp(SweepResult& r, const RunConfig& cfg, Study study) {
    RunConfig echo = cfg;
    echo.study = study;
    r.metadata.insert(r.metadata.begin(),
                      {{"opencav", OPENCAV_VERSION},
                       {"study", study_name(study)},
                       {"config", serialize_config(echo)},
                       {"sentinels", "inf = defective eigenpair (a_norm at an exceptional point); "
                                     "nan = grid point that failed numerically"}});
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename Fn>
SweepResult energy_sweep(const RunConfig& cfg, const RunOptions& opts, Study study,
                         const std::vector<std::string>& names, Fn&& per_energy) {
    const auto grid = cfg.e_grid.values();
    const auto model = build_model(cfg.model);
    auto rows = parallel_map<std::vector<double>>(grid.size(), opts, [&](std::size_t i) {
        std::vector<double> row(names.size(), kNaN);
        row[0] = grid[i];
        try {
            per_energy(model, grid[i], row);
        } catch (const NumericalError&) {
            std::fill(row.begin() + 1, row.end(), kNaN);
        }
        return row;
    });
    auto r = from_rows(names, rows);
    stamp(r, cfg, study);
    return r;
}

template <typename F>
SweepResult timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepResult r = f();
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace

const std::vector<double>& SweepResult::column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return columns[i];
    throw std::out_of_range("SweepResult: no column " + name);
}

void SweepResult::add_column(std::string name, std::vector<double> values) {
    if (!columns.empty() && values.size() != rows())
        throw std::invalid_argument("SweepResult: column length mismatch for " + name);
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
}

std::string SweepResult::meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
        if (k == key) return v;
    return {};
}

int count_peaks(const std::vector<double>& abs_t) {
    int peaks = 0;
    for (std::size_t i = 1; i + 1 < abs_t.size(); ++i)
        if (abs_t[i] > 0.5 && abs_t[i] > abs_t[i - 1] && abs_t[i] >= abs_t[i + 1]) ++peaks;
    return peaks;
}

double top_two_width_fraction(const std::vector<double>& widths) {
    if (widths.empty()) return kNaN;
    std::vector<double> w = widths;
    std::sort(w.begin(), w.end(), std::greater<>());
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const double top = w[0] + (w.size() > 1 ? w[1] : 0.0);
    return total > 0.0 ? top / total : kNaN;
}

SweepResult run_transmit_study(const RunConfig& cfg, const RunOptions& opts) {
    return timed([&] {
        const auto names = base_names({"energy", "t_re", "t_im", "T", "t_spectral_re", "t_spectral_im",
                                       "spectral_gap", "unitarity_defect"});
        return energy_sweep(cfg, opts, Study::Transmit, names,
                            [](const CavityModel& model, double e, std::vector<double>& row) {
                                const auto sol = solve_scattering(model, e);
                                const double defect =
                                    (sol.s_matrix.adjoint() * sol.s_matrix - SMatrix::Identity()).cwiseAbs().maxCoeff();
                                row[1] = sol.t_direct.real();
                                row[2] = sol.t_direct.imag();
                                row[3] = std::norm(sol.t_direct);
                                row[4] = sol.t_spectral.real();
                                row[5] = sol.t_spectral.imag();
                                row[6] = sol.spectral_valid ? std::abs(sol.t_spectral - sol.t_direct) : kNaN;
                                row[7] = defect;
                            });
    });
}

SweepResult run_rigidity_study(const RunConfig& cfg, const RunOptions& opts) {
    return timed([&] {
        const auto names = base_names({"energy", "rho_direct_mod", "rho_direct_theta", "rho_spectral_re",
                                       "rho_spectral_im", "b_antisymmetry_residual", "min_r", "max_a_norm"});
        return energy_sweep(cfg, opts, Study::Rigidity, names,
                            [](const CavityModel& model, double e, std::vector<double>& row) {
                                const auto sol = solve_scattering(model, e);
                                const auto& rr = sol.rigidity;
                                double min_r = 1.0;
                                for (const auto& [id, r] : rr.per_state_r) min_r = std::min(min_r, r);
                                row[1] = rr.rho_direct_mod;
                                row[2] = rr.rho_direct_theta;
                                row[3] = rr.rho_spectral.real();
                                row[4] = rr.rho_spectral.imag();
                                row[5] = rr.b_antisymmetry_residual;
                                row[6] = min_r;
                                row[7] = min_r > 0.0 ? 1.0 / min_r : std::numeric_limits<double>::infinity();
                            });
    });
}

SweepResult run_delay_study(const RunConfig& cfg, const RunOptions& opts) {
    return timed([&] {
        const auto names = base_names({"energy", "tau", "T"});
        const double step = cfg.delay_step;
        return energy_sweep(cfg, opts, Study::Delay, names,
                            [step](const CavityModel& model, double e, std::vector<double>& row) {
                                row[1] = wigner_delay(model, e, step);
                                row[2] = std::norm(transmission_direct(model, e));
                            });
    });
}

SweepResult run_crossover_study(const RunConfig& cfg, const RunOptions& opts) {
    if (cfg.alpha_grid.points < 10) throw ValidationError("alpha_grid.points", "crossover needs at least 10 points");
    return timed([&] {
        const auto alphas = cfg.alpha_grid.values();
        const auto energies = cfg.e_grid.values();
        const auto names = base_names({"alpha", "avg_T", "min_rho", "gamma_max", "gamma_median", "n_peaks"});
        auto rows = parallel_map<std::vector<double>>(alphas.size(), opts, [&](std::size_t i) {
            std::vector<double> row(names.size(), kNaN);
            row[0] = alphas[i];
            try {
                const auto model = build_model(cfg.model, alphas[i]);
                double sum_t = 0.0;
                double min_rho = 1.0;
                std::vector<double> abs_t;
                abs_t.reserve(energies.size());
                for (double e : energies) {
                    const Complex t = transmission_direct(model, e);
                    sum_t += std::norm(t);
                    abs_t.push_back(std::abs(t));
                    min_rho = std::min(min_rho, rho_direct(interior_wavefunction_direct(model, e)).modulus);
                }
                const auto spec = spectrum_at(model, cfg.track_energy);
                std::vector<double> widths;
                for (const auto& s : spec.states) widths.push_back(s.width());
                std::sort(widths.begin(), widths.end());
                const std::size_t m = widths.size();
                const double median = m % 2 ? widths[m / 2] : 0.5 * (widths[m / 2 - 1] + widths[m / 2]);
                row = {alphas[i], sum_t / static_cast<double>(energies.size()), min_rho, widths.back(), median,
                       static_cast<double>(count_peaks(abs_t))};
            } catch (const NumericalError&) {
            }
            return row;
        });
        auto r = from_rows(names, rows);
        stamp(r, cfg, Study::Crossover);
        return r;
    });
}

SweepResult run_trapping_study(const RunConfig& cfg, const RunOptions& opts) {
    return timed([&] {
        const auto alphas = cfg.alpha_grid.values();
        const auto energies = cfg.e_grid.values();
        const auto tracks =
            track_sweep([&](double a) { return build_model(cfg.model, a); }, alphas, cfg.track_energy);

        auto peaks = parallel_map<double>(alphas.size(), opts, [&](std::size_t i) {
            try {
                const auto model = build_model(cfg.model, alphas[i]);
                std::vector<double> abs_t;
                for (double e : energies) abs_t.push_back(std::abs(transmission_direct(model, e)));
                return static_cast<double>(count_peaks(abs_t));
            } catch (const NumericalError&) {
                return kNaN;
            }
        });

        SweepResult r;
        r.add_column("alpha", alphas);
        r.add_column("n_peaks", peaks);
        std::vector<double> top2, ambiguous;
        for (const auto& set : tracks) {
            std::vector<double> w;
            double amb = 0;
            for (const auto& s : set.states) {
                w.push_back(s.width());
                amb += s.ambiguous ? 1 : 0;
            }
            top2.push_back(top_two_width_fraction(w));
            ambiguous.push_back(amb);
        }
        r.add_column("top2_fraction", top2);
        r.add_column("ambiguous", ambiguous);
        const std::size_t n = tracks.empty() ? 0 : tracks.front().size();
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<double> g;
            for (const auto& set : tracks) g.push_back(set.states[k].width());
            r.add_column("gamma_" + std::to_string(tracks.front().states[k].track_id), g);
        }
        stamp(r, cfg, Study::Spectrum);
        return r;
    });
}

SweepResult run_ep_study(const RunConfig& cfg, const RunOptions&, SweepResult* partial) {
    if (!cfg.ep) throw ValidationError("ep", "the ep-find study needs an \"ep\" block");
    const EpConfig ep = *cfg.ep;
    const auto t0 = std::chrono::steady_clock::now();

    const auto family_model = [&](double alpha, double split) {
        auto model = build_model(cfg.model, alpha);
        auto& lat = model.lattice;
        if (!lat.potential) lat.potential = std::vector<double>(static_cast<std::size_t>(lat.nx * lat.ny), 0.0);
        (*lat.potential)[static_cast<std::size_t>(ep.plus_site.second * lat.nx + ep.plus_site.first)] += split / 2;
        (*lat.potential)[static_cast<std::size_t>(ep.minus_site.second * lat.nx + ep.minus_site.first)] -= split / 2;
        return model;
    };
    const MatrixFamily family = [&](double alpha, double split) {
        return assemble_heff(family_model(alpha, split), ep.energy);
    };

    SweepResult r;
    auto fill_path = [&](const std::vector<EpPathPoint>& path) {
        std::vector<double> it, p1, p2, sep, an;
        for (std::size_t i = 0; i < path.size(); ++i) {
            it.push_back(static_cast<double>(i));
            p1.push_back(path[i].p1);
            p2.push_back(path[i].p2);
            sep.push_back(path[i].separation_sq);
            an.push_back(path[i].a_norm);
        }
        r.add_column("iteration", it);
        r.add_column("alpha", p1);
        r.add_column("split", p2);
        r.add_column("separation_sq", sep);
        r.add_column("a_norm", an);
    };

    try {
        const auto found = find_exceptional_point(family, {ep.start_alpha, ep.start_split});
        fill_path(found.report.path);
        r.metadata = {{"found", "1"},
                      {"alpha_ep", fmt(found.p1)},
                      {"split_ep", fmt(found.p2)},
                      {"z_re", fmt(found.z.real())},
                      {"z_im", fmt(found.z.imag())},
                      {"separation_sq", fmt(found.report.separation_sq)},
                      {"coalescence_angle", fmt(found.report.coalescence_angle)},
                      {"max_a_norm", fmt(found.report.max_a_norm)}};
        const double e_lambda = found.z.real();
        if (std::abs(e_lambda) < 2.0) {
            const auto model = family_model(found.p1, found.p2);
            double t_max = 0.0;
            for (double e : cfg.e_grid.values()) t_max = std::max(t_max, std::abs(transmission_direct(model, e)));
            try {
                r.metadata.emplace_back("abs_t_at_ep", fmt(std::abs(transmission_direct(model, e_lambda))));
            } catch (const PoleOnAxis&) {
                r.metadata.emplace_back("abs_t_at_ep", "nan");
            }
            r.metadata.emplace_back("max_abs_t", fmt(t_max));
        }
    } catch (const NotFound& e) {
        r = SweepResult{};
        fill_path({});
        r.metadata = {{"found", "0"}, {"separation", fmt(e.separation())}};
        if (e.best_point().size() == 2) {
            r.metadata.emplace_back("alpha_best", fmt(e.best_point()[0]));
            r.metadata.emplace_back("split_best", fmt(e.best_point()[1]));
        }
        stamp(r, cfg, Study::EpFind);
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (partial) *partial = r;
        throw;
    }
    stamp(r, cfg, Study::EpFind);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

SweepResult run_study(const RunConfig& cfg, const RunOptions& opts) {
    switch (cfg.study) {
        case Study::Transmit: return run_transmit_study(cfg, opts);
        case Study::Spectrum: return run_trapping_study(cfg, opts);
        case Study::Rigidity: return run_rigidity_study(cfg, opts);
        case Study::EpFind: return run_ep_study(cfg, opts);
        case Study::Delay: return run_delay_study(cfg, opts);
        case Study::Crossover: return run_crossover_study(cfg, opts);
    }
    throw std::logic_error("run_study: unknown study");
}

std::string to_csv(const SweepResult& result) {
    std::string out;
    for (const auto& [k, v] : result.metadata) out += "# " + k + ": " + v + "\n";
    for (std::size_t c = 0; c < result.names.size(); ++c) out += (c ? "," : "") + result.names[c];
    out += "\n";
    for (std::size_t i = 0; i < result.rows(); ++i) {
        for (std::size_t c = 0; c < result.columns.size(); ++c) {
            if (c) out += ',';
            out += fmt(result.columns[c][i]);
        }
        out += "\n";
    }
    return out;
}

}  // namespace opencav
