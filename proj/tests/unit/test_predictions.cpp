#include <doctest.h>

#include <filesystem>

#include "minima/error.hpp"
#include "minima/predictions.hpp"
#include "minima/text_io.hpp"

using namespace minima;

TEST_CASE("two-class CSV row picks the larger confidence") {
    const auto recs = parse_predictions_csv("1, 0.3, 0.7\n");
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].predicted_label == 1);
    CHECK(recs[0].true_label == 1);
    CHECK(recs[0].correct());
}

TEST_CASE("row summing to 0.9 is rejected with its row") {
    try {
        make_record(0, {0.5, 0.4}, 7);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find('7') != std::string::npos);
    }
    CHECK_THROWS(parse_predictions_csv("0,0.5,0.4\n"));
}

TEST_CASE("uniform ten-class vector ties to the lowest index") {
    const auto r = make_record(3, std::vector<double>(10, 0.1));
    CHECK(r.predicted_label == 0);
    CHECK(argmax_lowest({0.2, 0.4, 0.4}) == 1);
}

TEST_CASE("small deviations are renormalized") {
    const auto r = make_record(0, {0.6000004, 0.4});
    double s = 0.0;
    for (double c : r.confidences) s += c;
    CHECK(std::abs(s - 1.0) < 1e-15);
    CHECK_THROWS_AS(make_record(0, {1.2, -0.2}), ValidationError);
    CHECK_THROWS_AS(make_record(5, {0.5, 0.5}), ValidationError);
}

TEST_CASE("JSON lines ingestion and round trip") {
    const std::string text = "{\"label\": 2, \"confidences\": [0.1, 0.2, 0.7]}\n\n{\"label\":0,\"confidences\":[0.9,0.05,0.05]}\n";
    const auto recs = parse_predictions_jsonl(text);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].predicted_label == 2);
    CHECK(recs[1].predicted_label == 0);
    const auto again = parse_predictions_jsonl(predictions_jsonl(recs));
    REQUIRE(again.size() == 2);
    CHECK(again[0].confidences == recs[0].confidences);
    CHECK_THROWS_AS(parse_predictions_jsonl("{\"label\": 1}\n"), ParseError);
}

TEST_CASE("ingest dispatches on extension") {
    const auto dir = std::filesystem::temp_directory_path() / "minima_unit_pred";
    write_file(dir / "a.jsonl", "{\"label\": 1, \"confidences\": [0.25, 0.75]}\n");
    write_file(dir / "b.csv", "label,c0,c1\n0,0.75,0.25\n");
    CHECK(ingest_predictions(dir / "a.jsonl").at(0).predicted_label == 1);
    CHECK(ingest_predictions(dir / "b.csv").at(0).predicted_label == 0);
    std::filesystem::remove_all(dir);
}
