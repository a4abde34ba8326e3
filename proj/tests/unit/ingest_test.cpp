#include <gtest/gtest.h>

#include "lectern/errors.hpp"
#include "lectern/ingest/segments.hpp"
#include "lectern/ingest/srt.hpp"
#include "test_support.hpp"

using namespace lectern;
using namespace lectern::ingest;

TEST(ParseTimestamp, Examples) {
    EXPECT_EQ(parse_timestamp("00:00:00,000"), 0.0);
    EXPECT_EQ(parse_timestamp("00:01:02,500"), 62.5);
    EXPECT_EQ(parse_timestamp("01:00:00,001"), 3600.001);
    EXPECT_EQ(parse_timestamp("00:00:01.250"), 1.25);
    EXPECT_EQ(parse_timestamp("100:00:00,000"), 360000.0);
}

TEST(ParseTimestamp, ErrorsCarryByteOffset) {
    try {
        parse_timestamp("00:0x:00,000");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 4u);
    }
    try {
        parse_timestamp("00:00:00;000");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 8u);
    }
    EXPECT_THROW(parse_timestamp("00:61:00,000"), ParseError);
    EXPECT_THROW(parse_timestamp("00:00:00,00"), ParseError);
    EXPECT_THROW(parse_timestamp(""), ParseError);
}

TEST(ParseTimestamp, FormatRoundTrip) {
    EXPECT_EQ(format_timestamp(62.5), "00:01:02,500");
    EXPECT_EQ(format_timestamp(3600.001), "01:00:00,001");
    for (std::int64_t ms : {0LL, 1LL, 999LL, 59999LL, 3599999LL, 359999999LL}) {
        const double s = static_cast<double>(ms) / 1000.0;
        EXPECT_EQ(parse_timestamp(format_timestamp(s)), s) << ms;
    }
}

TEST(ParseSrt, MinimalDocument) {
    const auto doc = parse_srt("1\n00:00:00,000 --> 00:00:05,000\nHello world\n");
    ASSERT_EQ(doc.entries.size(), 1u);
    EXPECT_EQ(doc.entries[0], (SubtitleEntry{1, 0.0, 5.0, "Hello world"}));
    EXPECT_TRUE(doc.warnings.empty());
}

TEST(ParseSrt, MultiLineCueCollapses) {
    const auto doc = parse_srt("1\n00:00:00,000 --> 00:00:05,000\nX-ray\nbasics\n");
    ASSERT_EQ(doc.entries.size(), 1u);
    EXPECT_EQ(doc.entries[0].text, "X-ray basics");
}

TEST(ParseSrt, OutOfNumericOrderKeepsFileOrder) {
    const auto doc = parse_srt(
        "2\n00:00:00,000 --> 00:00:02,000\nfirst\n\n"
        "1\n00:00:02,000 --> 00:00:04,000\nsecond\n\n"
        "3\n00:00:04,000 --> 00:00:06,000\nthird\n");
    ASSERT_EQ(doc.entries.size(), 3u);
    EXPECT_EQ(doc.entries[0].text, "first");
    EXPECT_EQ(doc.entries[1].text, "second");
    EXPECT_EQ(doc.entries[2].text, "third");
    EXPECT_EQ(doc.entries[0].index, 2);
    EXPECT_FALSE(doc.warnings.empty());
}

TEST(ParseSrt, BomCrlfMarkupAndCoordinates) {
    const auto doc = parse_srt(
        "\xEF\xBB\xBF"
        "1\r\n00:00:01,000 --> 00:00:03.500 X1:10 X2:20\r\n<i>Hello</i> <font color=\"red\">there</font>\r\n\r\n"
        "2\r\n00:00:04,000 --> 00:00:05,000\r\n  spaced   out  \r\n");
    ASSERT_EQ(doc.entries.size(), 2u);
    EXPECT_EQ(doc.entries[0], (SubtitleEntry{1, 1.0, 3.5, "Hello there"}));
    EXPECT_EQ(doc.entries[1].text, "spaced out");
}

TEST(ParseSrt, MissingBlankLineAndMissingNumber) {
    const auto doc = parse_srt(
        "1\n00:00:00,000 --> 00:00:01,000\nalpha\n"
        "2\n00:00:01,000 --> 00:00:02,000\nbeta\n\n"
        "00:00:02,000 --> 00:00:03,000\ngamma\n");
    ASSERT_EQ(doc.entries.size(), 3u);
    EXPECT_EQ(doc.entries[0].text, "alpha");
    EXPECT_EQ(doc.entries[1].text, "beta");
    EXPECT_EQ(doc.entries[2].text, "gamma");
    EXPECT_FALSE(doc.warnings.empty());
}

TEST(ParseSrt, EmptyAndBackwardsCuesDropped) {
    const auto doc = parse_srt(
        "1\n00:00:00,000 --> 00:00:01,000\n<i></i>\n\n"
        "2\n00:00:05,000 --> 00:00:04,000\nbackwards\n\n"
        "3\n00:00:06,000 --> 00:00:07,000\nkept\n");
    ASSERT_EQ(doc.entries.size(), 1u);
    EXPECT_EQ(doc.entries[0].text, "kept");
    EXPECT_EQ(doc.warnings.size(), 2u);
}

TEST(ParseSrt, BadTimecodeNamesCue) {
    try {
        parse_srt("1\n00:00:00,000 --> 00:00:01,000\nok\n\n7\n00:00:0a,000 --> 00:00:02,000\nbad\n");
        FAIL() << "expected ParseError";
    } catch (const EmptyDocumentError&) {
        FAIL() << "wrong error type";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.cue(), 7);
        EXPECT_NE(std::string(e.what()).find("cue 7"), std::string::npos);
    }
}

TEST(ParseSrt, EmptyDocument) {
    EXPECT_THROW(parse_srt(""), EmptyDocumentError);
    EXPECT_THROW(parse_srt("\xEF\xBB\xBF\n\n"), EmptyDocumentError);
}

TEST(StripMarkup, Tags) {
    EXPECT_EQ(strip_markup("<b>bold</b> and <i>it</i>"), "bold and it");
    EXPECT_EQ(strip_markup("a < b"), "a < b");
}

namespace {

SubtitleEntry cue(int i, double s, double e, std::string t) { return SubtitleEntry{i, s, e, std::move(t)}; }

}  // namespace

TEST(MergeEntries, GreedyExample) {
    const std::vector<SubtitleEntry> cues = {cue(1, 0, 8, "t1"), cue(2, 8, 15, "t2"), cue(3, 15, 25, "t3")};
    const auto segs = merge_entries(cues, SegmentationConfig{20.0}, "lec01");
    ASSERT_EQ(segs.size(), 2u);
    EXPECT_EQ(segs[0], (LectureSegment{"lec01-0000", "lec01", 0, 15, "t1 t2"}));
    EXPECT_EQ(segs[1], (LectureSegment{"lec01-0001", "lec01", 15, 25, "t3"}));
}

TEST(MergeEntries, OversizeSingleton) {
    const std::vector<SubtitleEntry> cues = {cue(1, 0, 30, "long")};
    const auto segs = merge_entries(cues, SegmentationConfig{20.0});
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_EQ(segs[0].start, 0.0);
    EXPECT_EQ(segs[0].end, 30.0);
}

TEST(MergeEntries, FourFiveSecondCuesPerSegment) {
    std::vector<SubtitleEntry> cues;
    for (int i = 0; i < 12; ++i) cues.push_back(cue(i + 1, 5.0 * i, 5.0 * (i + 1), "c" + std::to_string(i)));
    const auto segs = merge_entries(cues, SegmentationConfig{20.0});
    // Frozen from a hand trace: every segment holds four cues.
    ASSERT_EQ(segs.size(), 3u);
    EXPECT_EQ(segs[0].text, "c0 c1 c2 c3");
    EXPECT_EQ(segs[1].text, "c4 c5 c6 c7");
    EXPECT_EQ(segs[2].text, "c8 c9 c10 c11");
    EXPECT_EQ(segs[1].start, 20.0);
    EXPECT_EQ(segs[2].end, 60.0);
}

TEST(MergeEntries, EmptyAndUnsorted) {
    EXPECT_TRUE(merge_entries({}, SegmentationConfig{}).empty());
    const std::vector<SubtitleEntry> cues = {cue(1, 5, 6, "b"), cue(2, 1, 2, "a")};
    EXPECT_THROW(merge_entries(cues, SegmentationConfig{}), ContractError);
    EXPECT_THROW(SegmentationConfig{0.0}.validate(), ConfigError);
    EXPECT_THROW(SegmentationConfig{-1.0}.validate(), ConfigError);
}

TEST(MergeEntries, OverlapUsesLaterEnd) {
    const std::vector<SubtitleEntry> cues = {cue(1, 0, 10, "a"), cue(2, 2, 5, "b"), cue(3, 6, 21, "c")};
    const auto segs = merge_entries(cues, SegmentationConfig{20.0});
    ASSERT_EQ(segs.size(), 2u);
    EXPECT_EQ(segs[0].end, 10.0);
    EXPECT_EQ(segs[0].text, "a b");
}

TEST(Ingest, IdsFromFixture) {
    const std::string srt =
        "1\n00:00:00,000 --> 00:00:08,000\nt1\n\n2\n00:00:08,000 --> 00:00:15,000\nt2\n\n"
        "3\n00:00:15,000 --> 00:00:25,000\nt3\n";
    const auto r = ingest_document(srt, "lec01", SegmentationConfig{});
    ASSERT_EQ(r.segments.size(), 2u);
    EXPECT_EQ(r.segments[0].segment_id, "lec01-0000");
    EXPECT_EQ(r.segments[1].segment_id, "lec01-0001");
    EXPECT_EQ(ingest_document(srt, "lec01", SegmentationConfig{}).segments, r.segments);
}

TEST(Ingest, OutOfTemporalOrderSortedWithWarning) {
    const std::string srt =
        "1\n00:00:10,000 --> 00:00:12,000\nlater\n\n2\n00:00:00,000 --> 00:00:02,000\nearlier\n";
    const auto r = ingest_document(srt, "x", SegmentationConfig{});
    ASSERT_EQ(r.segments.size(), 1u);
    EXPECT_EQ(r.segments[0].text, "earlier later");
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Ingest, FileErrorsNamePath) {
    lectern::testing::TempDir dir;
    const auto p = dir.path() / "empty.srt";
    lectern::testing::write_file(p, "");
    try {
        ingest_lecture(p, "lec01", SegmentationConfig{});
        FAIL() << "expected EmptyDocumentError";
    } catch (const EmptyDocumentError& e) {
        EXPECT_NE(std::string(e.what()).find("empty.srt"), std::string::npos);
    }
    EXPECT_THROW(ingest_lecture(dir.path() / "missing.srt", "lec01", SegmentationConfig{}), Error);
    EXPECT_THROW(ingest_document("1\n00:00:00,000 --> 00:00:01,000\na\n", "bad/id", SegmentationConfig{}),
                 ConfigError);
}

TEST(Ingest, RandomDocumentsParseExactly) {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 30; ++round) {
        const auto doc = lectern::testing::generate_srt(rng, 1 + rng() % 200);
        const auto parsed = parse_srt(doc.bytes);
        ASSERT_EQ(parsed.entries.size(), doc.cues.size());
        for (std::size_t i = 0; i < doc.cues.size(); ++i) {
            EXPECT_EQ(parsed.entries[i].start, static_cast<double>(doc.cues[i].start_ms) / 1000.0);
            EXPECT_EQ(parsed.entries[i].end, static_cast<double>(doc.cues[i].end_ms) / 1000.0);
            EXPECT_EQ(parsed.entries[i].text, doc.cues[i].text);
        }
    }
}
