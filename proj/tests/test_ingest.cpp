#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "tsclust/csv.hpp"
#include "tsclust/error.hpp"
#include "tsclust/ingest.hpp"
#include "tsclust/synthgen.hpp"

using namespace tsclust;
using namespace tsclust::ingest;

namespace {

std::string long_rows(const std::string& id, std::size_t slots, double value, long skip = -1) {
    std::ostringstream os;
    for (std::size_t s = 0; s < slots; ++s)
        if (static_cast<long>(s) != skip) os << id << ',' << s << ',' << value << '\n';
    return os.str();
}

}  // namespace

TEST_CASE("constant readings normalize to ones") {
    const auto dir = testing::scratch_dir("ingest_ones");
    std::ofstream(dir / "in.csv") << "client_id,timestamp_slot,value\n" << long_rows("a", 96, 1.0) << long_rows("b", 96, 1.0);
    const auto r = ingest_cer_like(dir / "in.csv");
    CHECK(r.rejected.empty());
    CHECK(r.dataset.ids == std::vector<std::string>{"a", "b"});
    CHECK(r.dataset.series == Matrix(2, 2, 1.0));
    CHECK(r.daily == Matrix(2, 2, 48.0));
    CHECK_FALSE(r.dataset.labeled());
}

TEST_CASE("missing slot is rejected and logged") {
    const auto dir = testing::scratch_dir("ingest_missing");
    std::ofstream(dir / "in.csv") << "client_id,timestamp_slot,value\n"
                                  << long_rows("a", 96, 2.0) << long_rows("b", 96, 1.0, 17) << long_rows("c", 96, 3.0);
    const auto r = ingest_cer_like(dir / "in.csv");
    CHECK(r.dataset.ids == std::vector<std::string>{"a", "c"});
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].client_id == "b");
    CHECK(r.rejected[0].reason.find("missing") != std::string::npos);
    CHECK(r.rejected[0].reason.find("17") != std::string::npos);

    write_rejection_log(dir / "rejected.csv", r.rejected);
    const auto lines = csv::read_lines(dir / "rejected.csv");
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "client_id,reason");
    CHECK(lines[1].rfind("b,", 0) == 0);
}

TEST_CASE("other rejections") {
    const auto dir = testing::scratch_dir("ingest_reject");
    std::ofstream(dir / "in.csv") << "client_id,timestamp_slot,value\n"
                                  << long_rows("dup", 48, 1.0) << "dup,3,1.0\n"
                                  << long_rows("zero", 48, 0.0) << long_rows("nan", 48, NAN) << long_rows("ok", 48, 4.0);
    const auto r = ingest_cer_like(dir / "in.csv");
    CHECK(r.dataset.ids == std::vector<std::string>{"ok"});
    REQUIRE(r.rejected.size() == 3);
    CHECK(r.rejected[0].reason.find("duplicated") != std::string::npos);
    CHECK(r.rejected[1].reason == "zero mean consumption");
    CHECK(r.rejected[2].reason == "non-finite reading");

    IngestOptions raw;
    raw.mean_normalize = false;
    const auto kept = ingest_cer_like(dir / "in.csv", raw);
    CHECK(kept.dataset.ids == std::vector<std::string>{"zero", "ok"});
    CHECK(kept.dataset.series(1, 0) == 4.0 * 48.0);
}

TEST_CASE("expanded synthetic series round trip") {
    synthgen::GeneratorConfig cfg;
    cfg.length = 10;
    cfg.residential_count = 5;
    cfg.sme_count = 3;
    cfg.outlier_count = 2;
    cfg.seed = 9;
    const auto ds = synthgen::generate(cfg).data;
    const auto dir = testing::scratch_dir("ingest_round");
    synthgen::export_cer_long(ds, dir / "long.csv");
    const auto r = ingest_cer_like(dir / "long.csv");
    CHECK(r.dataset.ids == ds.ids);
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t d = 0; d < 10; ++d) CHECK(r.daily(i, d) == doctest::Approx(ds.series(i, d)).epsilon(1e-12));
    for (std::size_t i = 0; i < r.dataset.size(); ++i) {
        double mean = 0.0;
        for (double v : r.dataset.series.row(i)) mean += v / 10.0;
        CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));
    }

    IngestOptions truncate;
    truncate.max_days = 4;
    const auto shorter = ingest_cer_like(dir / "long.csv", truncate);
    CHECK(shorter.dataset.length() == 4);
    for (std::size_t d = 0; d < 4; ++d) CHECK(shorter.daily(0, d) == r.daily(0, d));
}

TEST_CASE("wide layout") {
    const auto dir = testing::scratch_dir("ingest_wide");
    std::ofstream(dir / "daily.csv") << "series_id,label,v_0,v_1,v_2\n"
                                     << "a,residential,1,2,3\nb,sme,2,2,2\nc,residential,1,,3\nb,sme,9,9,9\n";
    IngestOptions daily;
    daily.samples_per_day = 1;
    const auto r = ingest_cer_like(dir / "daily.csv", daily);
    CHECK(r.dataset.ids == std::vector<std::string>{"a"});
    CHECK(r.dataset.class_names == std::vector<std::string>{"residential"});
    CHECK(r.dataset.labels == std::vector<int>{0});
    CHECK(r.dataset.series == Matrix(1, 3, {0.5, 1.0, 1.5}));
    REQUIRE(r.rejected.size() == 2);
    CHECK(r.rejected[0].client_id == "b");
    CHECK(r.rejected[0].reason == "duplicate client row");
    CHECK(r.rejected[1].client_id == "c");

    std::ofstream(dir / "plain.csv") << "id,v_0,v_1,v_2,v_3\nx,1,1,3,3\n";
    IngestOptions pairs;
    pairs.samples_per_day = 2;
    const auto p = ingest_cer_like(dir / "plain.csv", pairs);
    CHECK(p.daily == Matrix(1, 2, {2.0, 6.0}));
    CHECK(p.dataset.series == Matrix(1, 2, {0.5, 1.5}));
}

TEST_CASE("malformed input") {
    const auto dir = testing::scratch_dir("ingest_bad");
    std::ofstream(dir / "fields.csv") << "client_id,timestamp_slot,value\na,0,1\na,1\n";
    try {
        ingest_cer_like(dir / "fields.csv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::ofstream(dir / "value.csv") << "client_id,timestamp_slot,value\na,0,1\na,1,abc\n";
    CHECK_THROWS_WITH_AS(ingest_cer_like(dir / "value.csv"), doctest::Contains(":3:"), ParseError);
    std::ofstream(dir / "slot.csv") << "client_id,timestamp_slot,value\na,-1,1\n";
    CHECK_THROWS_AS(ingest_cer_like(dir / "slot.csv"), ParseError);
    std::ofstream(dir / "partial.csv") << "client_id,timestamp_slot,value\n" << long_rows("a", 50, 1.0);
    CHECK_THROWS_AS(ingest_cer_like(dir / "partial.csv"), ParseError);
    std::ofstream(dir / "empty.csv") << "";
    CHECK_THROWS_AS(ingest_cer_like(dir / "empty.csv"), ParseError);
    CHECK_THROWS_AS(ingest_cer_like(dir / "nothing_here.csv"), IoError);
    IngestOptions zero;
    zero.samples_per_day = 0;
    CHECK_THROWS_AS(ingest_cer_like(dir / "fields.csv", zero), ParameterError);
}
