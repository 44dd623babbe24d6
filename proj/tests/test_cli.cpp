#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "olsim/cli/config.hpp"
#include "olsim/cli/runner.hpp"

using namespace olsim;
using namespace olsim::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / ("olsim_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string error_of(const std::string& text) {
    try {
        parse_spec(text, "t.ini");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

const char* kCouplings = R"([experiment]
type = coupling_map
output_prefix = cm

[physical]
rabi = 0.01
trap = 1
ground_width = 0.1
lattice_spacing = 1
xi = 0.5
regime = radiative

[numerics]
radius = 2
)";

int shell(const std::string& cmd) {
    const int st = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

} // namespace

TEST(Parse, SectionsCommentsAndWhitespace) {
    const auto cfg = parse_config("# head\n[physical]\n  rabi =  0.02  # tail\n\n[numerics]\nradius=4\n");
    ASSERT_NE(cfg.find("physical", "rabi"), nullptr);
    EXPECT_EQ(cfg.find("physical", "rabi")->value, "0.02");
    EXPECT_EQ(cfg.find("physical", "rabi")->line, 3);
    EXPECT_EQ(cfg.find("numerics", "radius")->line, 6);
    EXPECT_EQ(cfg.find("numerics", "missing"), nullptr);
}

TEST(Parse, LinePreciseErrors) {
    EXPECT_EQ(error_of("[experiment]\ntype = coupling_map\n[physical]\nrabbi = 1\n"),
              "ConfigError: t.ini:4: unknown key 'rabbi' in [physical]");
    EXPECT_EQ(error_of("[experiment]\ntype = coupling_map\n[physics]\n"), "ConfigError: t.ini:3: unknown section [physics]");
    EXPECT_EQ(error_of("[experiment]\ntype = coupling_map\n[physical]\nrabi = -1\n"), "ConfigError: t.ini:4: rabi must be > 0");
    EXPECT_EQ(error_of("[experiment]\ntype = coupling_map\n[physical]\nrabi = 1\nrabi = 2\n"),
              "ConfigError: t.ini:5: duplicate key 'rabi' (first set on line 4)");
    EXPECT_EQ(error_of("[experiment]\ntype = nope\n"), "ConfigError: t.ini:2: unknown experiment 'nope'");
    EXPECT_EQ(error_of("[experiment]\ntype = coupling_map\n\n[numerics]\npoints = 10\n"),
              "ConfigError: t.ini:5: key 'points' does not apply to experiment coupling_map");
    EXPECT_EQ(error_of("[physical]\nrabi = 1\n"), "ConfigError: t.ini:0: missing [experiment] type");
    EXPECT_EQ(error_of("rabi = 1\n"), "ConfigError: t.ini:1: key outside of any section");
    EXPECT_EQ(error_of("[experiment]\ntype = coupling_map\n[physical]\nsites_per_axis = 2.5\n"),
              "ConfigError: t.ini:4: sites_per_axis must be an integer in [1, 64]");
    EXPECT_EQ(error_of("[experiment]\ntype = coupling_map\n[physical]\ndetuning = 1\nxi = 1\n"),
              "ConfigError: t.ini:5: xi and detuning both set; xi fixes the detuning");
}

TEST(Parse, SweepErrors) {
    EXPECT_EQ(error_of("[experiment]\ntype = coupling_map\nsweep_key = colour\nsweep_values = 1\n"),
              "ConfigError: t.ini:3: cannot sweep over unknown key 'colour'");
    EXPECT_EQ(error_of("[experiment]\ntype = coupling_map\nsweep_key = rabi\nsweep_values = 0.1, -2\n"),
              "ConfigError: t.ini:4: sweep value -2: rabi must be > 0");
    EXPECT_EQ(error_of("[experiment]\ntype = coupling_map\nsweep_key = rabi\nsweep_values = 0.1, inf\n"),
              "ConfigError: t.ini:4: sweep value 'inf' is not a finite number");
    EXPECT_EQ(error_of("[experiment]\ntype = coupling_map\nsweep_key = rabi\n"),
              "ConfigError: t.ini:3: sweep_key and sweep_values must be given together");
}

TEST(Parse, DefaultsAreRecorded) {
    const auto spec = parse_spec(kCouplings);
    EXPECT_EQ(spec.experiment, ExperimentKind::coupling_map);
    EXPECT_EQ(spec.integer("radius"), 2);
    EXPECT_FALSE(spec.defaulted.count("radius"));
    EXPECT_TRUE(spec.defaulted.count("oracle"));
    for (const auto& k : numeric_keys())
        EXPECT_EQ(spec.numerics.count(k.name) > 0, olsim::cli::detail::applies(k, ExperimentKind::coupling_map)) << k.name;
}

TEST(Presets, AllSelfValidate) {
    for (const auto& p : presets()) {
        const auto d = validate_text(p.text, p.name);
        EXPECT_TRUE(d.ok()) << p.name << ": " << (d.errors.empty() ? "" : d.errors.front());
    }
    EXPECT_TRUE(validate_text(find_preset("fig5").text, "fig5").errors.empty());
}

TEST(Presets, CaptionValues) {
    const auto f3 = preset("fig3");
    EXPECT_EQ(f3.experiment, ExperimentKind::coupling_map);
    EXPECT_DOUBLE_EQ(f3.params.lattice_spacing / f3.params.x0(), 10.0);
    EXPECT_EQ(f3.params.laser_wavevector, Eigen::Vector3d::Zero());
    EXPECT_EQ(f3.sweep->values.size(), 4u);

    const auto f4 = preset("fig4");
    EXPECT_EQ(f4.params.num_sites(), 27);
    EXPECT_EQ(f4.sweep->values, (std::vector<double>{0.01, 0.5, 1, 10}));

    const auto f5 = preset("fig5");
    EXPECT_EQ(f5.params.num_sites(), 27);
    EXPECT_EQ(split_list(f5.text_value("phases"), ','), (std::vector<std::string>{"superfluid", "mott"}));

    const auto f2 = preset("fig2");
    EXPECT_EQ(f2.sweep->values, (std::vector<double>{0.02, 0.05, 0.1}));
    EXPECT_DOUBLE_EQ(f2.number("scan_min"), -0.05);
    EXPECT_DOUBLE_EQ(f2.number("scan_max"), 0.1);

    // the three single-site panels sit in their regions
    const std::pair<const char*, Regime> panels[] = {
        {"fig2a", Regime::bound}, {"fig2b", Regime::pure_non_markovian}, {"fig2c", Regime::radiative}};
    for (const auto& [name, regime] : panels)
        EXPECT_EQ(derive_scales(point_params(preset(name))).regime, regime) << name;

    EXPECT_THROW(preset("fig9"), UnknownPreset);
}

TEST(Validate, FirstBandWarning) {
    const std::string text = "[experiment]\ntype = validity_report\n[physical]\nrabi = 1\ntrap = 1\ndetuning = 10\n";
    const auto d = validate_text(text, "w.ini");
    EXPECT_TRUE(d.ok());
    bool found = false;
    for (const auto& w : d.warnings)
        found = found || w.find("first-band condition violated") != std::string::npos;
    EXPECT_TRUE(found);
}

TEST(Validate, SweepPointErrorsNameThePoint) {
    // a resonant laser needs k0, which does not exist at the critical detuning
    const std::string text = "[experiment]\ntype = validity_report\nsweep_key = detuning\n"
                             "sweep_values = 0.0004, 0.01\n[physical]\nrabi = 0.01\nlaser = resonant\n";
    const auto d = validate_text(text, "s.ini");
    ASSERT_EQ(d.errors.size(), 1u);
    EXPECT_NE(d.errors[0].find("s.ini:4: detuning = 0.000400"), std::string::npos) << d.errors[0];
}

TEST(Run, WritesOneFilePerPointAndManifest) {
    const auto dir = scratch("sweep");
    auto text = std::string(kCouplings);
    text.replace(text.find("xi = 0.5\n"), 9, "");
    text.replace(text.find("output_prefix = cm\n"), 19, "output_prefix = cm\nsweep_key = xi\nsweep_values = 0.5, 2\n");
    const auto spec = parse_spec(text, "sweep.ini");
    RunOptions opt;
    opt.out_dir = dir;
    opt.threads = 2;
    const auto rep = run(spec, opt);
    ASSERT_TRUE(rep.ok);
    ASSERT_EQ(rep.points.size(), 2u);
    EXPECT_EQ(rep.points[0].label, "xi_5.000000e-01");
    EXPECT_EQ(rep.points[1].label, "xi_2.000000e+00");
    for (const auto& p : rep.points)
        for (const auto& f : p.files) {
            EXPECT_TRUE(fs::exists(dir / f));
            const auto body = slurp(dir / f);
            EXPECT_NE(body.find('\n'), std::string::npos);
        }
    for (const auto& e : fs::directory_iterator(dir))
        EXPECT_NE(e.path().extension(), ".tmp");

    const auto m = json::parse(slurp(rep.manifest));
    EXPECT_EQ(m["experiment"], "coupling_map");
    EXPECT_EQ(m["spec_text"], text);
    EXPECT_EQ(m["numerics"]["oracle"]["defaulted"], true);
    EXPECT_EQ(m["numerics"]["radius"]["defaulted"], false);
    for (const auto& k : spec.defaulted)
        EXPECT_TRUE(m["numerics"].contains(k)) << k;
    EXPECT_EQ(m["points"].size(), 2u);
    EXPECT_TRUE(m["points"][0]["derived"].contains("gamma0"));
    EXPECT_TRUE(m["points"][0].contains("wall_time_s"));
    fs::remove_all(dir);
}

TEST(Run, EmptySweepIsOneFile) {
    const auto dir = scratch("single");
    RunOptions opt;
    opt.out_dir = dir;
    const auto rep = run(parse_spec(kCouplings), opt);
    ASSERT_EQ(rep.points.size(), 1u);
    EXPECT_EQ(rep.points[0].files, (std::vector<std::string>{"cm.csv"}));
    fs::remove_all(dir);
}

TEST(Run, ByteIdenticalReruns) {
    const char* text = R"([experiment]
type = single_site_trace
sweep_key = rabi
sweep_values = 0.04, 0.05
output_prefix = rep

[physical]
trap = 1
detuning = 0.0084292

[numerics]
points = 50
)";
    const auto spec = parse_spec(text);
    const auto a = scratch("rep_a");
    const auto b = scratch("rep_b");
    RunOptions oa, ob;
    oa.out_dir = a;
    ob.out_dir = b;
    ob.threads = 2;
    const auto ra = run(spec, oa);
    const auto rb = run(spec, ob);
    ASSERT_TRUE(ra.ok);
    for (std::size_t i = 0; i < ra.points.size(); ++i) {
        ASSERT_EQ(ra.points[i].files, rb.points[i].files);
        for (const auto& f : ra.points[i].files)
            EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Run, PointErrorsAreReported) {
    const auto dir = scratch("err");
    // the second point lands on the critical detuning 4 Omega^2 / omega0
    const char* text = "[experiment]\ntype = validity_report\nsweep_key = detuning\nsweep_values = 0.01, 0.0004\n"
                       "[physical]\nrabi = 0.01\n";
    RunOptions opt;
    opt.out_dir = dir;
    const auto rep = run(parse_spec(text), opt);
    EXPECT_FALSE(rep.ok);
    EXPECT_TRUE(rep.points[0].error.empty());
    EXPECT_NE(rep.points[1].error.find("sweep point detuning_4.000000e-04"), std::string::npos)
        << rep.points[1].error;
    fs::remove_all(dir);
}

TEST(Run, RejectsBadToleranceScale) {
    RunOptions opt;
    opt.tolerance_scale = 0.0;
    EXPECT_THROW(run(parse_spec(kCouplings), opt), ConfigError);
}

TEST(Binary, ExitCodes) {
    const std::string exe = OLSIM_CLI_PATH;
    const auto dir = scratch("bin");
    {
        std::ofstream(dir / "good.ini") << kCouplings;
        std::ofstream(dir / "bad.ini") << "[experiment]\ntype = coupling_map\nsweep_key = colour\nsweep_values = 1\n";
    }
    EXPECT_EQ(shell(exe + " list-presets"), 0);
    EXPECT_EQ(shell(exe + " preset fig5"), 0);
    EXPECT_EQ(shell(exe + " preset nosuch"), 2);
    EXPECT_EQ(shell(exe + " validate --spec " + (dir / "good.ini").string()), 0);
    EXPECT_EQ(shell(exe + " validate --spec " + (dir / "bad.ini").string()), 2);
    EXPECT_EQ(shell(exe + " run --spec " + (dir / "bad.ini").string()), 2);
    EXPECT_EQ(shell(exe + " run --spec " + (dir / "missing.ini").string()), 2);
    EXPECT_EQ(shell(exe + " run --spec " + (dir / "good.ini").string() + " --out " + (dir / "o").string() +
                    " --threads 2 --tolerance-scale 1"),
              0);
    EXPECT_TRUE(fs::exists(dir / "o" / "cm.csv"));
    EXPECT_TRUE(fs::exists(dir / "o" / "cm_manifest.json"));
    EXPECT_NE(shell(exe + " run --spec " + (dir / "good.ini").string() + " --threads 0"), 0);
    EXPECT_NE(shell(exe), 0);
    fs::remove_all(dir);
}
