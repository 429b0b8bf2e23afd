#include <doctest.h>

#include <filesystem>
#include <limits>
#include <sstream>

#include "rbb/error.hpp"
#include "rbb/io.hpp"

using namespace rbb;

namespace {

std::string error_text(auto&& f, ErrorKind expected) {
    try {
        f();
    } catch (const Error& e) {
        CHECK(e.kind() == expected);
        return e.what();
    }
    FAIL("expected an rbb::Error");
    return {};
}

CompositionMatrix parse_matrix(const std::string& text, bool features_in_rows = false) {
    std::istringstream in(text);
    return io::read_matrix(in, "m.tsv", features_in_rows);
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("doubles round-trip through text") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 1e-7}) {
        const auto back = io::parse_double(io::format_double(x));
        REQUIRE(back);
        CHECK(*back == x);
    }
    CHECK_FALSE(io::parse_double("nan"));
    CHECK_FALSE(io::parse_double("inf"));
    CHECK_FALSE(io::parse_double("1.5x"));
    CHECK_FALSE(io::parse_double(""));
    CHECK(io::parse_double(" 2.5 ") == 2.5);
}

TEST_CASE("tab and comma matrices") {
    const auto a = parse_matrix("id\ta\tb\ns1\t1\t2\ns2\t3\t4\n");
    const auto b = parse_matrix("id,a,b\ns1,1,2\ns2,3,4\n");
    CHECK(a.values() == b.values());
    CHECK(a.sample_ids() == Labels{"s1", "s2"});
    CHECK(a.feature_ids() == Labels{"a", "b"});
    CHECK(a.values()(1, 0) == 3.0);
}

TEST_CASE("features-in-rows layout is transposed") {
    const auto m = parse_matrix("id\ts1\ts2\ts3\na\t1\t2\t3\nb\t4\t5\t6\n", true);
    CHECK(m.samples() == 3);
    CHECK(m.feature_ids() == Labels{"a", "b"});
    CHECK(m.values()(2, 1) == 6.0);
}

TEST_CASE("malformed cells are reported with their position") {
    const auto msg = error_text([] { parse_matrix("id\ta\tb\ns1\t1\t2\ns2\tabc\t4\n"); }, ErrorKind::Parse);
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
    CHECK(msg.find("abc") != std::string::npos);

    const auto neg = error_text([] { parse_matrix("id,a,b\ns1,1,-2\n"); }, ErrorKind::Parse);
    CHECK(neg.find("line 2, column 3") != std::string::npos);

    const auto nan = error_text([] { parse_matrix("id,a,b\ns1,nan,2\n"); }, ErrorKind::Parse);
    CHECK(nan.find("column 2") != std::string::npos);

    const auto ragged = error_text([] { parse_matrix("id,a,b\ns1,1,2\ns2,3\n"); }, ErrorKind::Parse);
    CHECK(ragged.find("line 3") != std::string::npos);
}

TEST_CASE("missing file is a path error") {
    error_text([] { io::read_matrix_file("/nonexistent/matrix.tsv"); }, ErrorKind::Path);
}

TEST_CASE("outcomes are aligned to the matrix sample order") {
    std::istringstream in("sample\tgroup\ns2\t1\ns1\t0\ns3\t1\n");
    const auto y = io::read_outcome(in, {"s1", "s2", "s3"});
    CHECK(y.kind == OutcomeKind::Binary);
    CHECK(y.values == Eigen::Vector3d(0, 1, 1));

    std::istringstream cont("s1,0.5\ns2,1.5\n");
    const auto c = io::read_outcome(cont, {"s2", "s1"});
    CHECK(c.kind == OutcomeKind::Continuous);
    CHECK(c.values == Eigen::Vector2d(1.5, 0.5));

    std::istringstream forced("s1,0\ns2,1\n");
    CHECK(io::read_outcome(forced, {"s1", "s2"}, io::OutcomeHint::Continuous).kind == OutcomeKind::Continuous);
}

TEST_CASE("outcome errors") {
    error_text([] {
        std::istringstream in("s1\t1\n");
        io::read_outcome(in, {"s1", "s2"});
    }, ErrorKind::DimensionMismatch);
    const auto msg = error_text([] {
        std::istringstream in("s1\t1\ns2\tx\n");
        io::read_outcome(in, {"s1", "s2"});
    }, ErrorKind::Parse);
    CHECK(msg.find("line 2, column 2") != std::string::npos);
}

TEST_CASE("key-value documents round-trip") {
    io::KeyValueDoc doc;
    doc.set("name", "balance");
    doc.set("beta", 0.1);
    doc.set("count", 3);
    doc.set("flag", true);
    doc.set_list("ids", {"a", "b", "c"});
    doc.set("beta", 0.2);

    std::istringstream in("# comment\n\n" + doc.to_string());
    const auto back = io::KeyValueDoc::parse(in);
    CHECK(back.get("name") == "balance");
    CHECK(back.get_double("beta") == 0.2);
    CHECK(back.get_int("count") == 3);
    CHECK(back.get("flag") == "true");
    CHECK(back.get_list("ids") == std::vector<std::string>{"a", "b", "c"});
    CHECK(back.to_string() == doc.to_string());
    error_text([&] { back.get("absent"); }, ErrorKind::Parse);
}

TEST_CASE("atomic writes leave only the target behind") {
    const auto dir = std::filesystem::temp_directory_path() / "rbb_io_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    io::write_file_atomic(dir / "out.txt", "first");
    io::write_file_atomic(dir / "out.txt", "second");
    CHECK(io::read_file(dir / "out.txt") == "second");
    int files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("matrix tables print every value exactly") {
    Eigen::MatrixXd v(1, 2);
    v << 0.1, 1.0 / 3.0;
    const auto text = io::matrix_table(v, {"s1"}, {"a", "b"}).to_string();
    const auto back = parse_matrix(text);
    CHECK(back.values() == v);
}

}
