#include <gtest/gtest.h>

#include "relval/csv.hpp"

using namespace relval;

TEST(Csv, ParsesHeaderAndRows) {
    const auto t = csv::parse("a,b,c\n1,2,3\n4,5,6\n");
    ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b", "c"}));
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[1], (std::vector<std::string>{"4", "5", "6"}));
}

TEST(Csv, HandlesQuotedFields) {
    const auto t = csv::parse("name,v\n\"a,b\",1\n\"say \"\"hi\"\"\",2\n\"line\nbreak\",3\n");
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_EQ(t.rows[0][0], "a,b");
    EXPECT_EQ(t.rows[1][0], "say \"hi\"");
    EXPECT_EQ(t.rows[2][0], "line\nbreak");
}

TEST(Csv, AcceptsCrLfAndMissingFinalNewline) {
    const auto t = csv::parse("a,b\r\n1,2\r\n3,4");
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[1][1], "4");
}

TEST(Csv, EmptyFieldsSurvive) {
    const auto t = csv::parse("a,b,c\n,,\nx,,y\n");
    EXPECT_EQ(t.rows[0], (std::vector<std::string>{"", "", ""}));
    EXPECT_EQ(t.rows[1][1], "");
}

TEST(Csv, UnterminatedQuoteIsRejected) {
    EXPECT_THROW(csv::parse("a\n\"oops\n"), BadValueError);
}

TEST(Csv, WriteRowQuotesOnlyWhenNeeded) {
    EXPECT_EQ(csv::write_row({"plain", "with,comma", "with\"quote"}),
              "plain,\"with,comma\",\"with\"\"quote\"\n");
}

TEST(Csv, RoundTrip) {
    const std::vector<std::string> fields{"a,b", "c\nd", "e\"f", "plain"};
    const std::string text = csv::write_row({"h1", "h2", "h3", "h4"}) + csv::write_row(fields);
    const auto t = csv::parse(text);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0], fields);
}
