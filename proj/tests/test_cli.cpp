#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    const char* cli = std::getenv("FAIRVOL_CLI");
    REQUIRE(cli != nullptr);
    static int counter = 0;
    fs::path out = fs::temp_directory_path() / ("fv_cli_out_" + std::to_string(counter) + ".txt");
    fs::path err = fs::temp_directory_path() / ("fv_cli_err_" + std::to_string(counter) + ".txt");
    ++counter;
    std::string cmd = '"' + std::string(cli) + "\" " + args + " >" + out.string() + " 2>" +
                      err.string();
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    fs::remove(out);
    fs::remove(err);
    return r;
}

// value column of an `index,time,value` table
std::vector<double> values_of(const std::string& csv) {
    std::vector<double> out;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        auto second = line.find(',', line.find(',') + 1);
        if (second == std::string::npos) continue;
        out.push_back(std::stod(line.substr(second + 1)));
    }
    return out;
}

double acf1(const std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        den += (x[t] - mean) * (x[t] - mean);
        if (t > 0) num += (x[t] - mean) * (x[t - 1] - mean);
    }
    return num / den;
}

std::string next_date(const std::string& iso) {
    int y = std::stoi(iso.substr(0, 4));
    int mo = std::stoi(iso.substr(5, 2));
    int d = std::stoi(iso.substr(8, 2));
    static const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = days[mo - 1];
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (mo == 2 && leap) dim = 29;
    if (++d > dim) {
        d = 1;
        if (++mo > 12) {
            mo = 1;
            ++y;
        }
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, mo, d);
    return buf;
}

// small price fixture: geometric walk over the value column of a simulated
// noise path produced by the binary itself
fs::path make_price_csv(std::size_t rows, std::uint64_t seed, int blank_every = 0) {
    fs::path raw = fs::temp_directory_path() / ("fv_cli_raw_" + std::to_string(seed) + ".csv");
    RunResult sim = run_cli("simulate --process iid --n " + std::to_string(rows) + " --seed " +
                            std::to_string(seed) + " --output " + raw.string());
    REQUIRE(sim.code == 0);
    auto noise = values_of(read_file(raw));
    fs::remove(raw);

    fs::path p = fs::temp_directory_path() / ("fv_cli_prices_" + std::to_string(seed) + ".csv");
    std::ofstream out(p, std::ios::binary);
    out << "date,close\n";
    std::string date = "2005-01-03";
    double level = 100.0;
    out << date << ',' << level << '\n';
    // per-step scale consistent with a unit-interval observation grid, so the
    // estimator lands near one half instead of saturating at a clamp
    const double scale = 1.0 / std::sqrt(static_cast<double>(noise.size()));
    for (std::size_t i = 0; i < noise.size(); ++i) {
        date = next_date(date);
        level *= std::exp(scale * noise[i]);
        if (blank_every > 0 && i % blank_every == 1) {
            out << date << ",\n";
            continue;
        }
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", level);
        out << date << ',' << buf << '\n';
    }
    return p;
}

}  // namespace

TEST_CASE("cli repeats itself bit for bit under one seed") {
    const std::string args = "simulate --process fbm --n 256 --h 0.6 --seed 9";
    RunResult a = run_cli(args);
    RunResult b = run_cli(args);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    REQUIRE(a.out == b.out);
    REQUIRE(a.out.rfind("index,time,value\n", 0) == 0);

    RunResult c = run_cli("simulate --process fbm --n 256 --h 0.6 --seed 10");
    REQUIRE(c.code == 0);
    REQUIRE(c.out != a.out);
}

TEST_CASE("cli kernel process writes identical files across runs") {
    fs::path f1 = fs::temp_directory_path() / "fv_cli_mpre1.csv";
    fs::path f2 = fs::temp_directory_path() / "fv_cli_mpre2.csv";
    const std::string base = "simulate --process mpre --n 256 --h 0.7 --nu 1.5 --seed 4 --output ";
    REQUIRE(run_cli(base + f1.string()).code == 0);
    REQUIRE(run_cli(base + f2.string()).code == 0);
    REQUIRE(read_file(f1) == read_file(f2));
    REQUIRE(values_of(read_file(f1)).size() == 256);
    fs::remove(f1);
    fs::remove(f2);
}

TEST_CASE("cli usage errors exit with code two") {
    REQUIRE(run_cli("simulate --process fbm --seed 1 --bogus 3").code == 2);
    REQUIRE(run_cli("simulate --process brownian --seed 1").code == 2);
    REQUIRE(run_cli("simulate --process fbm").code == 2);          // seed is required
    REQUIRE(run_cli("simulate --seed 1").code == 2);               // process is required
    REQUIRE(run_cli("simulate --process ar1 --phi 1.5 --seed 1").code == 2);
    REQUIRE(run_cli("simulate --process fgn --h 1.2 --seed 1").code == 2);
    REQUIRE(run_cli("validate --suite nosuch --seed 1").code == 2);
    REQUIRE(run_cli("validate --suite specfun").code == 2);        // seed is required
    REQUIRE(run_cli("nosuchcommand").code == 2);
    REQUIRE(run_cli("").code == 2);                                // subcommand is required
}

TEST_CASE("cli analyze parameter and data failures are distinguished") {
    REQUIRE(run_cli("analyze --input /nonexistent/prices.csv").code == 1);

    fs::path p = make_price_csv(120, 77);
    REQUIRE(run_cli("analyze --input " + p.string() + " --delta 3").code == 2);
    REQUIRE(run_cli("analyze --input " + p.string() + " --format csv").code == 2);
    REQUIRE(run_cli("analyze --input " + p.string() + " --format yaml").code == 2);
    REQUIRE(run_cli("analyze --input " + p.string() + " --alpha 2").code == 2);
    fs::remove(p);

    fs::path broken = fs::temp_directory_path() / "fv_cli_broken.csv";
    std::ofstream(broken) << "date,close\n2020-02-30,10\n2020-03-01,11\n";
    REQUIRE(run_cli("analyze --input " + broken.string()).code == 1);
    fs::remove(broken);
}

TEST_CASE("cli help exits cleanly") {
    REQUIRE(run_cli("--help").code == 0);
    RunResult r = run_cli("simulate --help");
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("--process") != std::string::npos);
}

TEST_CASE("cli glued segments cancel in the pooled autocorrelation", "[mc]") {
    fs::path f = fs::temp_directory_path() / "fv_cli_concat.csv";
    RunResult r = run_cli("simulate --process concat --h 0.75 --h2 0.25 --n 4096 --seed 7 --output " +
                          f.string());
    REQUIRE(r.code == 0);
    auto x = values_of(read_file(f));
    fs::remove(f);
    REQUIRE(x.size() >= 4096);
    REQUIRE(std::abs(acf1(x)) < 0.15);

    // while each half keeps its own sign
    std::vector<double> head(x.begin(), x.begin() + x.size() / 2);
    std::vector<double> tail(x.begin() + x.size() / 2, x.end());
    REQUIRE(acf1(head) > 0.2);
    REQUIRE(acf1(tail) < -0.15);
}

TEST_CASE("cli analyze produces report, panels and summary line", "[mc]") {
    fs::path p = make_price_csv(600, 11);
    fs::path rep = fs::temp_directory_path() / "fv_cli_report.json";
    fs::path panels = fs::temp_directory_path() / "fv_cli_panels";

    RunResult r = run_cli("analyze --input " + p.string() + " --output " + rep.string() +
                          " --plot-data " + panels.string());
    REQUIRE(r.code == 0);
    REQUIRE(r.err.find("# summary instrument=") != std::string::npos);
    REQUIRE(r.err.find("pct_h_in_ci=") != std::string::npos);
    REQUIRE(r.err.find("regime_pct=[momentum=") != std::string::npos);

    std::string json = read_file(rep);
    REQUIRE(json.rfind("{", 0) == 0);
    REQUIRE(json.find("\"h_hat\"") != std::string::npos);
    for (const char* name : {"panel_hurst.csv", "panel_volatility.csv", "panel_nu.csv"})
        REQUIRE(fs::exists(panels / name));

    // csv report form
    fs::path dir = fs::temp_directory_path() / "fv_cli_csvrep";
    RunResult rc = run_cli("analyze --input " + p.string() + " --format csv --output " +
                           dir.string());
    REQUIRE(rc.code == 0);
    REQUIRE(fs::exists(dir / "summary.csv"));
    REQUIRE(fs::exists(dir / "metrics.csv"));

    fs::remove(p);
    fs::remove(rep);
    fs::remove_all(panels);
    fs::remove_all(dir);
}

TEST_CASE("cli analyze warns about dropped rows") {
    fs::path p = make_price_csv(200, 13, 50);
    RunResult r = run_cli("analyze --input " + p.string());
    REQUIRE(r.code == 0);
    REQUIRE(r.err.find("warning: dropped") != std::string::npos);
    fs::remove(p);
}

TEST_CASE("cli closed form validation suite passes") {
    RunResult r = run_cli("validate --suite specfun --seed 1");
    REQUIRE(r.code == 0);
    REQUIRE(r.out.rfind("case,value,lo,hi,pass\n", 0) == 0);
    REQUIRE(r.err.find("# all cases passed") != std::string::npos);
    REQUIRE(r.out.find(",fail") == std::string::npos);
    // table is sorted by case id
    std::istringstream in(r.out);
    std::string line, prev;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::string id = line.substr(0, line.find(','));
        REQUIRE(prev <= id);
        prev = id;
    }
}

TEST_CASE("cli demo emits the benchmark scorecard") {
    fs::path dir = fs::temp_directory_path() / "fv_cli_demo";
    RunResult r = run_cli("demo --seed 5 --output " + dir.string());
    REQUIRE(r.code == 0);
    REQUIRE(r.out.rfind("series,field,value\n", 0) == 0);
    for (const char* label : {"iid", "inid", "ar1_pos", "ar1_neg"}) {
        REQUIRE(r.out.find(std::string(label) + ",mean,") != std::string::npos);
        REQUIRE(r.out.find(std::string(label) + ",acf1,") != std::string::npos);
        REQUIRE(r.out.find(std::string(label) + ",adf_pvalue,") != std::string::npos);
        REQUIRE(fs::exists(dir / (std::string(label) + ".csv")));
    }
    fs::remove_all(dir);
}
