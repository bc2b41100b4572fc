#include <gtest/gtest.h>

#include "dotin/config.hpp"
#include "dotin/errors.hpp"

using namespace dotin;

TEST(Config, ParseCommentsAndOverrides) {
  const Config c = Config::parse("# header\nlr = 0.01  # inline\n\nname = run one\nlr = 0.02\n");
  EXPECT_DOUBLE_EQ(c.get_double("lr", 0), 0.02);
  EXPECT_EQ(c.get_string("name", ""), "run one");
  EXPECT_EQ(c.get_int("missing", 5), 5);
}

TEST(Config, BadLineNamesLineNumber) {
  try {
    (void)Config::parse("a = 1\nnot an assignment\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Config, TypedGetters) {
  Config c;
  c.apply_override("flag=yes");
  c.apply_override("xs = 0.1, 0.5,0.9");
  c.apply_override("names=a,b");
  c.apply_override("bad=x1");
  EXPECT_TRUE(c.get_bool("flag", false));
  EXPECT_EQ(c.get_doubles("xs", {}), (std::vector<double>{0.1, 0.5, 0.9}));
  EXPECT_EQ(c.get_strings("names", {}), (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW((void)c.get_int("bad", 0), ConfigError);
  EXPECT_THROW((void)c.get_double("bad", 0), ConfigError);
  EXPECT_THROW(c.apply_override("novalue"), ConfigError);
}

TEST(Config, DumpRoundTrips) {
  Config c;
  c.set("b", "2");
  c.set("a", "x y");
  const Config back = Config::parse(c.dump());
  EXPECT_EQ(back.entries(), c.entries());
}
