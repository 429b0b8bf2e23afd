#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "rbb/cli.hpp"
#include "rbb/io.hpp"

using namespace rbb;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out, err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "rbb");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "rbb_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) { io::write_file_atomic(p, text); }

io::KeyValueDoc doc_of(const fs::path& p) { return io::KeyValueDoc::parse_file(p); }

/// Manifest without the line that legitimately differs between runs.
std::string manifest_without_time(const fs::path& p) {
    std::istringstream in(io::read_file(p));
    std::string line, out;
    while (std::getline(in, line))
        if (line.rfind("wall_clock_seconds", 0) != 0) out += line + "\n";
    return out;
}

std::vector<std::string> table_lines(const fs::path& p) {
    std::istringstream in(io::read_file(p));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

/// Numeric body of a tab-separated table with a header row and a label column.
Eigen::MatrixXd numbers(const fs::path& p) {
    const auto lines = table_lines(p);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::istringstream cells(lines[i]);
        std::string cell;
        std::getline(cells, cell, '\t');
        rows.emplace_back();
        while (std::getline(cells, cell, '\t')) rows.back().push_back(*io::parse_double(cell));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.at(0).size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("transform writes clr, proportions and ratios") {
    const auto dir = scratch("transform");
    write(dir / "m.tsv", "sample\ta\tb\tc\td\ns1\t5\t5\t5\t5\ns2\t1\t2\t3\t4\ns3\t2\t0\t6\t8\n");
    const auto r = invoke({"transform", "--matrix", (dir / "m.tsv").string(), "--out-dir", (dir / "out").string(),
                           "--transform", "clr,prop,pairwise"});
    REQUIRE(r.code == 0);
    const auto clr = numbers(dir / "out" / "clr.tsv");
    CHECK(clr.row(0).cwiseAbs().maxCoeff() == 0.0);
    const auto prop = io::read_matrix_file(dir / "out" / "proportions.tsv");
    CHECK(prop.values()(1, 3) == doctest::Approx(0.4));
    CHECK(numbers(dir / "out" / "pairwise.tsv").cols() == 6);
    CHECK(table_lines(dir / "out" / "pairwise.tsv")[0].rfind("sample\ta/b\ta/c", 0) == 0);
    CHECK(fs::exists(dir / "out" / "run_manifest.txt"));
}

TEST_CASE("malformed input exits with a parse error naming the cell") {
    const auto dir = scratch("parse");
    write(dir / "m.tsv", "sample\ta\tb\ns1\t1\t2\ns2\tabc\t4\n");
    const auto r = invoke({"transform", "--matrix", (dir / "m.tsv").string(), "--out-dir", (dir / "out").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK(r.err.find("column 2") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out"));

    CHECK(invoke({"transform", "--no-such-flag"}).code == 2);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"learn", "--seed", "x", "--matrix", (dir / "m.tsv").string()}).code == 2);
}

TEST_CASE("missing inputs are precondition failures") {
    const auto dir = scratch("missing");
    write(dir / "m.tsv", "sample\ta\tb\ns1\t1\t2\ns2\t3\t4\n");
    const auto r = invoke({"learn", "--matrix", (dir / "m.tsv").string(), "--outcome", (dir / "none.tsv").string(),
                           "--out-dir", (dir / "out").string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("outcome") != std::string::npos);
    CHECK(invoke({"learn", "--out-dir", (dir / "out").string()}).code == 3);
}

TEST_CASE("simulate then learn recovers the planted pair") {
    const auto dir = scratch("golden");
    const auto sim = dir / "sim";
    REQUIRE(invoke({"simulate", "--seed", "7", "--samples", "200", "--features", "20", "--out-dir", sim.string()}).code == 0);
    const auto scenario = doc_of(sim / "scenario.txt");

    auto learn = [&](const std::string& out) {
        return invoke({"learn", "--matrix", (sim / "observed.tsv").string(), "--outcome", (sim / "labels.tsv").string(),
                       "--out-dir", (dir / out).string(), "--seed", "3"});
    };
    REQUIRE(learn("a").code == 0);
    const auto model = doc_of(dir / "a" / "model.txt");
    const auto num = model.get_list("numerator");
    const auto den = model.get_list("denominator");
    const auto pn = scenario.get_list("planted.numerator");
    const auto pd = scenario.get_list("planted.denominator");
    CHECK(((num == pn && den == pd) || (num == pd && den == pn)));

    REQUIRE(learn("b").code == 0);
    CHECK(io::read_file(dir / "a" / "model.txt") == io::read_file(dir / "b" / "model.txt"));
    CHECK(io::read_file(dir / "a" / "metrics.tsv") == io::read_file(dir / "b" / "metrics.tsv"));
    const auto metrics = table_lines(dir / "a" / "metrics.tsv");
    CHECK(metrics.front() == "split\tmetric\tvalue");
}

TEST_CASE("a manifest reproduces its run and flags override it") {
    const auto dir = scratch("manifest");
    REQUIRE(invoke({"simulate", "--seed", "11", "--samples", "30", "--features", "6", "--out-dir", (dir / "a").string()})
                .code == 0);
    REQUIRE(invoke({"simulate", "--config", (dir / "a" / "run_manifest.txt").string(), "--out-dir",
                    (dir / "b").string()}).code == 0);
    for (const auto* name : {"true.tsv", "observed.tsv", "labels.tsv", "scenario.txt", "da_report.tsv"}) {
        CHECK(io::read_file(dir / "a" / name) == io::read_file(dir / "b" / name));
    }
    const auto ma = manifest_without_time(dir / "a" / "run_manifest.txt");
    const auto mb = manifest_without_time(dir / "b" / "run_manifest.txt");
    CHECK(ma.substr(0, ma.find("config.out_dir")) == mb.substr(0, mb.find("config.out_dir")));

    REQUIRE(invoke({"simulate", "--config", (dir / "a" / "run_manifest.txt").string(), "--seed", "12", "--out-dir",
                    (dir / "c").string()}).code == 0);
    CHECK(doc_of(dir / "c" / "run_manifest.txt").get("config.seed") == "12");
    CHECK(doc_of(dir / "c" / "run_manifest.txt").get("config.samples") == "30");
    CHECK(io::read_file(dir / "a" / "true.tsv") != io::read_file(dir / "c" / "true.tsv"));

    const auto manifest = doc_of(dir / "a" / "run_manifest.txt");
    CHECK(manifest.get("tool.version") == std::string(cli::tool_version));
    CHECK(manifest.get("subcommand") == "simulate");
}

TEST_CASE("input digests are recorded") {
    const auto dir = scratch("digest");
    write(dir / "m.tsv", "sample\ta\tb\ns1\t1\t2\ns2\t3\t4\n");
    REQUIRE(invoke({"transform", "--matrix", (dir / "m.tsv").string(), "--out-dir", (dir / "out").string()}).code == 0);
    const auto manifest = doc_of(dir / "out" / "run_manifest.txt");
    CHECK(manifest.get("input.0.role") == "matrix");
    CHECK(manifest.get("input.0.sha256") == cli::sha256_hex(io::read_file(dir / "m.tsv")));
    CHECK(cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("the three-feature preset reports disagreeing notions") {
    const auto dir = scratch("three-feature");
    REQUIRE(invoke({"simulate", "--preset", "three-feature", "--out-dir", dir.string()}).code == 0);
    const auto lines = table_lines(dir / "da_report.tsv");
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "feature\tabsolute\trelative\tpresential");
    CHECK(lines[1] == "a\t+\t-\t0");
}

TEST_CASE("without measurement noise observed values are the truth times the biases") {
    const auto dir = scratch("zero_noise");
    REQUIRE(invoke({"simulate", "--preset", "zero-noise", "--samples", "12", "--features", "5", "--out-dir",
                    dir.string()}).code == 0);
    const auto truth = numbers(dir / "true.tsv");
    const auto observed = numbers(dir / "observed.tsv");
    const auto bias = numbers(dir / "feature_bias.tsv");
    const auto depth = numbers(dir / "depth.tsv");
    for (Eigen::Index i = 0; i < truth.rows(); ++i)
        for (Eigen::Index j = 0; j < truth.cols(); ++j)
            CHECK(observed(i, j) == truth(i, j) * bias(j, 0) * depth(i, 0));
}

TEST_CASE("benchmark on paired data gives the full table") {
    const auto dir = scratch("benchmark");
    REQUIRE(invoke({"simulate", "--preset", "paired", "--samples", "60", "--features", "8", "--features2", "10",
                    "--out-dir", (dir / "sim").string()}).code == 0);
    const auto r = invoke({"benchmark", "--matrix", (dir / "sim" / "T.tsv").string(), "--matrix2",
                           (dir / "sim" / "U.tsv").string(), "--nn-epochs", "300", "--out-dir", (dir / "out").string()});
    REQUIRE(r.code == 0);
    const auto lines = table_lines(dir / "out" / "benchmark.tsv");
    REQUIRE(lines.size() == 13);
    CHECK(lines[0] == "objective\tlatent\toriginal_r2\trbb_source\trbb_vars\trbb_r2\tstatus");
    for (std::size_t i = 1; i < lines.size(); ++i) CHECK(lines[i].find("\tok") != std::string::npos);
}

}
