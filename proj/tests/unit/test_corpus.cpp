#include <sstream>

#include "doctest.h"
#include "improbe/corpus.hpp"
#include "improbe/errors.hpp"

using namespace improbe;
using namespace improbe::dataset;

TEST_SUITE("corpus") {
  TEST_CASE("csv with optional fields and extra columns") {
    const auto docs = parse_corpus_csv(
        "doc_id,text,quality_score,dialect_posterior,group_tag,warmth\n"
        "d1,hello,7,0.25,AAL,0.9\n"
        "d2,bye,,,,\n");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].quality_score == 7);
    CHECK(docs[0].dialect_posterior == 0.25);
    CHECK(docs[0].group_tag == "AAL");
    CHECK(docs[0].extra.at("warmth") == "0.9");
    CHECK_FALSE(docs[1].quality_score.has_value());
    CHECK_FALSE(docs[1].response_text.has_value());
  }

  TEST_CASE("jsonl and round trip") {
    const auto docs = parse_corpus_jsonl(
        "{\"doc_id\":\"a\",\"text\":\"x y\",\"response_text\":\"r\",\"quality_score\":3,\"extra\":1.5}\n\n"
        "{\"doc_id\":\"b\",\"text\":\"z\"}\n");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].response_text == "r");
    CHECK(docs[0].extra.at("extra") == "1.5");
    std::ostringstream out;
    write_corpus_jsonl(out, docs);
    const auto again = parse_corpus_jsonl(out.str());
    REQUIRE(again.size() == 2);
    CHECK(again[0].quality_score == 3);
    CHECK(again[0].extra == docs[0].extra);
    std::ostringstream out2;
    write_corpus_jsonl(out2, again);
    CHECK(out2.str() == out.str());
  }

  TEST_CASE("field ranges are validated") {
    CHECK_THROWS_AS(parse_corpus_csv("doc_id,text,quality_score\nd,t,10\n"), Error);
    CHECK_THROWS_AS(parse_corpus_csv("doc_id,text,quality_score\nd,t,0\n"), Error);
    CHECK_THROWS_AS(parse_corpus_csv("doc_id,text,dialect_posterior\nd,t,1.5\n"), Error);
    CHECK_THROWS_AS(parse_corpus_csv("doc_id,body\nd,t\n"), Error);
    CHECK_THROWS_AS(parse_corpus_jsonl("{\"doc_id\":\"a\"}\n"), Error);
    CHECK_THROWS_AS(parse_corpus_jsonl("not json\n"), Error);
  }
}
