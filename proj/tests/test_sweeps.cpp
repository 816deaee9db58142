#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "opencav/studies.hpp"

using namespace opencav;

namespace {

const char* kChain = R"({
  "format_version": 1,
  "model": {
    "lattice": {"nx": 4},
    "leads": {"L": {"site": [0, 0]}, "R": {"site": [3, 0]}},
    "alpha": 0.6
  },
  "e_grid": {"min": -1.8, "max": 1.8, "points": 13},
  "alpha_grid": {"min": 0.1, "max": 3.0, "points": 10, "scale": "log"}
})";

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "opencav_test_sweeps";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("parse_config fills defaults") {
    const auto cfg = parse_config(R"({"model": {"lattice": {"nx": 3},
        "leads": {"L": {"site": [0, 0]}, "R": {"site": [2, 0]}}}})");
    CHECK(cfg.model.nx == 3);
    CHECK(cfg.model.ny == 1);
    CHECK(cfg.model.alpha == 1.0);
    CHECK(cfg.model.right.coupling_w == 1.0);
    CHECK(cfg.e_grid == EnergyGrid{});
    CHECK(cfg.alpha_grid == AlphaGrid{});
    CHECK(cfg.study == Study::Transmit);
    CHECK_FALSE(cfg.ep.has_value());

    const auto model = build_model(cfg.model);
    CHECK(model.left.contact_site == 0);
    CHECK(model.right.contact_site == 2);
}

TEST_CASE("parse_config validation errors name the field") {
    auto field_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ValidationError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    const std::string model = R"("model": {"lattice": {"nx": 3}, "leads": {"L": {"site": [0, 0]}, "R": {"site": [2, 0]}}})";
    CHECK(field_of("{" + model + R"(, "e_grid": {"max": 3.0}})") == "e_grid.max");
    CHECK(field_of("{" + model + R"(, "bogus": 1})") == "bogus");
    CHECK(field_of("{" + model + R"(, "e_grid": {"step": 1}})") == "e_grid.step");
    CHECK(field_of("{" + model + R"(, "alpha_grid": {"min": 0.0}})") == "alpha_grid.min");
    CHECK(field_of("{" + model + R"(, "format_version": 2})") == "format_version");
    CHECK(field_of(R"({"model": {"lattice": {"nx": 3}, "leads": {"L": {"site": [0, 0]}, "R": {"site": [5, 0]}}}})") ==
          "model.leads.R.site");
    CHECK(field_of(R"({"model": {"lattice": {"nx": 3, "mask": ["#.#"]},
        "leads": {"L": {"site": [0, 0]}, "R": {"site": [2, 0]}}}})") == "model.lattice");
}

TEST_CASE("parse_config reports syntax errors with a position") {
    try {
        parse_config("{\n  \"model\": ,\n}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() >= 11);
    }
}

TEST_CASE("config round trip through serialize_config") {
    auto cfg = parse_config(kChain);
    cfg.model.mask = std::vector<bool>{true, true, true, true};
    cfg.model.potential = std::vector<double>{0.0, 0.25, -0.25, 0.0};
    cfg.ep = EpConfig{0.1, 1.5, 0.5, {1, 0}, {2, 0}};
    cfg.output_path = "out.csv";
    cfg.study = Study::Rigidity;
    CHECK(parse_config(serialize_config(cfg)) == cfg);
}

TEST_CASE("grid overrides apply before validation") {
    const auto cfg = parse_config(kChain, {"e_grid.points=7", "model.alpha=0.25", "alpha_grid.scale=linear"});
    CHECK(cfg.e_grid.points == 7);
    CHECK(cfg.model.alpha == 0.25);
    CHECK_FALSE(cfg.alpha_grid.log_scale);
    CHECK_THROWS_AS(parse_config(kChain, {"e_grid.max=2.5"}), ValidationError);
    CHECK_THROWS_AS(parse_config(kChain, {"no_equals_sign"}), ValidationError);
}

TEST_CASE("mask_path is resolved against the config directory") {
    const auto dir = scratch_dir();
    {
        std::ofstream(dir / "ring.mask") << "###\n#.#\n###\n";
    }
    const auto cfg = parse_config(R"({"model": {"lattice": {"nx": 3, "ny": 3, "mask_path": "ring.mask"},
        "leads": {"L": {"site": [0, 0]}, "R": {"site": [2, 2]}}}})",
                                  {}, dir.string());
    REQUIRE(cfg.model.mask.has_value());
    CHECK(std::count(cfg.model.mask->begin(), cfg.model.mask->end(), true) == 8);
    CHECK_FALSE((*cfg.model.mask)[4]);
    CHECK(build_model(cfg.model).right.contact_site == 7);
}

TEST_CASE("CSV rendering") {
    SweepResult empty;
    empty.metadata = {{"study", "transmit"}};
    CHECK(to_csv(empty) == "# study: transmit\n\n");

    SweepResult r;
    r.add_column("x", {0.5, -1.0});
    r.add_column("y", {std::nan(""), std::numeric_limits<double>::infinity()});
    CHECK(to_csv(r) == "x,y\n0.5,nan\n-1,inf\n");
    CHECK(r.column("y").size() == 2);
    CHECK_THROWS(r.add_column("z", {1.0}));

    SweepResult exact;
    exact.add_column("v", {0.1});
    CHECK(to_csv(exact) == "v\n0.10000000000000001\n");
}

TEST_CASE("export_csv reports unwritable paths") {
    SweepResult r;
    r.add_column("x", {1.0});
    CHECK_THROWS_AS(export_csv(r, "/nonexistent-dir/out.csv"), WriteError);
    const auto path = scratch_dir() / "ok.csv";
    export_csv(r, path.string());
    std::ifstream in(path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text == to_csv(r));
}

TEST_CASE("sweeps are byte-identical across thread counts") {
    for (Study s : {Study::Transmit, Study::Rigidity, Study::Delay, Study::Crossover, Study::Spectrum}) {
        auto cfg = parse_config(kChain);
        cfg.study = s;
        const auto one = to_csv(run_study(cfg, RunOptions{1}));
        const auto four = to_csv(run_study(cfg, RunOptions{4}));
        CHECK(one == four);
    }
}

TEST_CASE("study outputs carry the expected columns and metadata") {
    auto cfg = parse_config(kChain);
    const auto t = run_transmit_study(cfg);
    CHECK(t.rows() == 13);
    CHECK(t.names.front() == "energy");
    CHECK(t.meta("study") == "transmit");
    CHECK(t.meta("opencav") == OPENCAV_VERSION);
    CHECK(parse_config(t.meta("config")).e_grid == cfg.e_grid);
    for (std::size_t i = 0; i < t.rows(); ++i) {
        CHECK(t.column("T")[i] <= 1.0 + 1e-12);
        CHECK(t.column("unitarity_defect")[i] < 1e-10);
        CHECK(t.column("spectral_gap")[i] < 1e-8);
    }

    const auto rig = run_rigidity_study(cfg);
    for (double m : rig.column("rho_direct_mod")) CHECK(m <= 1.0);

    const auto c = run_crossover_study(cfg);
    CHECK(c.rows() == 10);
    CHECK(c.names == std::vector<std::string>{"alpha", "avg_T", "min_rho", "gamma_max", "gamma_median", "n_peaks"});

    cfg.alpha_grid.points = 9;
    CHECK_THROWS_AS(run_crossover_study(cfg), ValidationError);

    const auto trap = run_trapping_study(cfg);
    CHECK(trap.rows() == 9);
    CHECK(trap.column("gamma_0").size() == 9);
}

TEST_CASE("ep study locates the coalescence of an engineered ring") {
    auto cfg = parse_config(R"({
      "model": {"lattice": {"nx": 2, "ny": 2},
                "leads": {"L": {"site": [0, 0]}, "R": {"site": [1, 1]}}},
      "e_grid": {"min": -1.9, "max": 1.9, "points": 39},
      "ep": {"energy": 0.0, "start": [1.5, 1.0], "plus_site": [1, 0], "minus_site": [0, 1]}
    })");
    const auto r = run_ep_study(cfg);
    CHECK(r.meta("found") == "1");
    // Rebuild H_eff at the reported point and look for the coalesced pair.
    const double alpha = std::stod(r.meta("alpha_ep"));
    const double split = std::stod(r.meta("split_ep"));
    auto model = build_model(cfg.model, alpha);
    model.lattice.potential = std::vector<double>{0.0, split / 2, -split / 2, 0.0};
    const auto eig = eig_general(assemble_heff(model, 0.0));
    const Complex z(std::stod(r.meta("z_re")), std::stod(r.meta("z_im")));
    int near = 0;
    for (Eigen::Index k = 0; k < eig.size(); ++k) near += std::abs(eig.values[k] - z) < 1e-6;
    CHECK(near == 2);
    // Mirror symmetry of the ring pins the coalesced level to the band centre.
    CHECK(std::abs(z.real()) < 1e-6);
    CHECK(std::stod(r.meta("coalescence_angle")) < 1e-4);
    CHECK(r.rows() > 0);

    cfg.ep.reset();
    CHECK_THROWS_AS(run_ep_study(cfg), ValidationError);
}

TEST_CASE("count_peaks and top_two_width_fraction") {
    CHECK(count_peaks({}) == 0);
    CHECK(count_peaks({0.1, 0.9, 0.2, 0.8, 0.3}) == 2);
    CHECK(count_peaks({0.1, 0.4, 0.2}) == 0);
    CHECK(count_peaks({1.0, 0.5, 1.0}) == 0);  // endpoints are not maxima
    CHECK(top_two_width_fraction({1.0, 1.0, 2.0}) == doctest::Approx(0.75));
    CHECK(std::isnan(top_two_width_fraction({})));
}
