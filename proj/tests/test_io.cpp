#include "helpers.hpp"
#include <fstream>

#include <cstdio>
#include <filesystem>

#include "kwlab/report.hpp"
#include "kwlab/snapshot.hpp"

using namespace kwlab;
using namespace kwtest;

TEST_CASE("snapshot round trip is bit exact") {
    auto lat = TorusLattice::make(4, 4);
    auto g = GaugeGroup::su2();
    Rng rng(2);
    FieldSnapshot snap;
    snap.group = g;
    snap.lat = lat;
    snap.fields.push_back({"A", sample_ad_form(lat, g, 1, 1, 0.5, rng, Herm::anti)});
    snap.fields.push_back({"a", sample_ad_form(lat, g, 1, 1, 0.5, rng, Herm::anti)});
    std::string path = std::filesystem::temp_directory_path() / "kwf_test.kwf";
    save_snapshot(snap, path);
    FieldSnapshot back = load_snapshot(path);
    REQUIRE(back.fields.size() == 2);
    CHECK(back.group.rank == 2);
    CHECK(back.at("A").data == snap.at("A").data);
    CHECK(back.at("a").data == snap.at("a").data);
    CHECK(back.at("A").cls == Herm::anti);
    // corrupt the version field: rejected, never coerced
    {
        FILE* f = std::fopen(path.c_str(), "r+b");
        REQUIRE(f);
        std::fseek(f, 4, SEEK_SET);
        unsigned char v2[4] = {2, 0, 0, 0};
        std::fwrite(v2, 1, 4, f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_snapshot(path), PreconditionError);
    // bad magic rejected
    {
        FILE* f = std::fopen(path.c_str(), "r+b");
        REQUIRE(f);
        std::fwrite("XXXX", 1, 4, f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_snapshot(path), PreconditionError);
    std::filesystem::remove(path);
}

TEST_CASE("config parser: strict unknown-key rejection") {
    auto cfg = RunConfig::parse_text("n = 12\nseed = 7 # comment\n\n# full line\n",
                                     {"n", "seed", "tol"});
    CHECK(cfg.kv.at("n") == "12");
    CHECK(cfg.kv.at("seed") == "7");
    CHECK_THROWS_AS(RunConfig::parse_text("bogus = 1\n", {"n"}), PreconditionError);
    CHECK_THROWS_AS(RunConfig::parse_text("n = 1\nn = 2\n", {"n"}), PreconditionError);
    CHECK_THROWS_AS(RunConfig::parse_text("justtext\n", {"n"}), PreconditionError);
    // canonicalization sorts keys
    CHECK(cfg.canonical() == "n=12\nseed=7\n");
}

TEST_CASE("json writer determinism and escaping") {
    auto build = [] {
        JsonWriter w;
        w.begin_object();
        w.field("name", "a\"b\\c\n");
        w.field("x", 0.1);
        w.begin_array("ar");
        w.value(1);
        w.value(2.5);
        w.value(true);
        w.end_array();
        w.end_object();
        return w.str();
    };
    CHECK(build() == build());
    CHECK(build().find("a\\\"b\\\\c\\n") != std::string::npos);
    CHECK(fnv1a64("abc") != fnv1a64("abd"));
    CHECK(hex64(fnv1a64("abc")).size() == 16);
}

TEST_CASE("trace csv") {
    FlowTrace tr;
    tr.push_back({0, 1.0, 1.0, 0.1, 3.5});
    tr.push_back({1, 0.5, 0.5, 0.2, 3.6});
    std::string path = std::filesystem::temp_directory_path() / "kw_trace.csv";
    trace_csv(tr, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "iteration,residual,energy,step,millis");
    std::filesystem::remove(path);
}
