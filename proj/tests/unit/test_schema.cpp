#include <doctest.h>

#include <random>

#include "support/fixtures.hpp"
#include "tracknlu/schema.hpp"

using namespace tracknlu;

namespace {

bool has_message(const Violations& vs, std::string_view needle) {
  for (const auto& v : vs) {
    if (v.message.find(needle) != std::string::npos) return true;
  }
  return false;
}

Item item_of(std::map<std::string, FieldValue> values) {
  Item it;
  it.tracker_id = "exercise";
  it.values = std::move(values);
  return it;
}

}  // namespace

TEST_CASE("exercise tracker is well formed") {
  CHECK(validate_tracker(fixture::exercise()).empty());
  CHECK(validate_tracker(fixture::exercise(true)).empty());
}

TEST_CASE("tracker violations") {
  auto s = fixture::exercise();
  s.fields.clear();
  CHECK(has_message(validate_tracker(s), "fields empty"));

  s = fixture::exercise();
  s.fields.push_back({"Mood", LikertKind{5, 1}, std::nullopt});
  const auto vs = validate_tracker(s);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].path == "fields[3].kind");
  CHECK(has_message(vs, "min < max"));

  s = fixture::exercise();
  s.fields.push_back({"Wide", LikertKind{0, 21}, std::nullopt});
  CHECK(has_message(validate_tracker(s), "exceeds 20"));
  s.fields.back().kind = LikertKind{0, 20};
  CHECK(validate_tracker(s).empty());

  s = fixture::exercise();
  s.fields.push_back({"exercise ", NumberKind{}, std::nullopt});
  CHECK(has_message(validate_tracker(s), "duplicate field"));

  s = fixture::exercise();
  s.fields.push_back({"Kind", SingleChoiceKind{{"A", " a"}}, std::nullopt});
  CHECK(has_message(validate_tracker(s), "duplicate option"));
  s.fields.back().kind = MultiChoiceKind{{"only"}};
  CHECK(has_message(validate_tracker(s), "at least 2"));

  s = fixture::exercise();
  s.fields.push_back({"When", DateKind{}, std::nullopt});
  CHECK_FALSE(validate_tracker(s).empty());

  s = fixture::exercise();
  s.time_field = FieldSpec{"Time", NumberKind{}, std::nullopt};
  CHECK_FALSE(validate_tracker(s).empty());
}

TEST_CASE("validate_item examples") {
  const auto schema = fixture::exercise();

  auto ok = validate_item(schema, item_of({{"Exercise", std::string("push-ups")},
                                           {"Repetitions", 3.0},
                                           {"Intensity", std::string("light")}}));
  REQUIRE(ok.ok());
  CHECK(ok.violations.empty());

  auto bad = validate_item(schema, item_of({{"Repetitions", std::string("three")}}));
  CHECK_FALSE(bad.ok());
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].message.find("kind mismatch") != std::string::npos);

  auto norm = validate_item(schema, item_of({{"Intensity", std::string("LIGHT ")}}));
  REQUIRE(norm.ok());
  CHECK(std::get<std::string>(norm.item->values.at("Intensity")) == "light");

  auto unknown = validate_item(schema, item_of({{"Weight", 70.0}}));
  CHECK_FALSE(unknown.ok());
  CHECK(has_message(unknown.violations, "unknown field"));

  auto respelled = validate_item(schema, item_of({{"repetitions", 5.0}}));
  REQUIRE(respelled.ok());
  CHECK(respelled.item->values.count("Repetitions") == 1);
}

TEST_CASE("validate_item: likert range, empty commits, multi-choice") {
  TrackerSchema s;
  s.tracker_id = "mood";
  s.name = "Mood";
  s.fields = {{"Mood", LikertKind{1, 5}, std::nullopt},
              {"Emotions", MultiChoiceKind{{"happy", "calm", "sad"}}, std::nullopt}};
  Item it;
  it.tracker_id = "mood";
  it.values = {{"Mood", LikertValue{9}}};
  CHECK(has_message(validate_item(s, it).violations, "outside [1, 5]"));
  it.values = {{"Mood", 3.0}};  // numbers that are whole fit a likert
  auto as_number = validate_item(s, it);
  if (as_number.ok()) CHECK(std::get<LikertValue>(as_number.item->values.at("Mood")).value == 3);

  it.values = {};
  CHECK(validate_item(s, it, ItemMode::draft).ok());
  CHECK_FALSE(validate_item(s, it, ItemMode::committed).ok());

  it.values = {{"Emotions", ChoiceSet{{"SAD", "happy"}}}};
  auto multi = validate_item(s, it);
  REQUIRE(multi.ok());
  CHECK(std::get<ChoiceSet>(multi.item->values.at("Emotions")).labels ==
        std::vector<std::string>{"happy", "sad"});

  it.values = {{"Emotions", ChoiceSet{}}};
  CHECK_FALSE(validate_item(s, it).ok());
  it.values = {{"Emotions", ChoiceSet{{"bored"}}}};
  CHECK_FALSE(validate_item(s, it).ok());
}

TEST_CASE("accepted items never repeat a field") {
  const auto schema = fixture::exercise();
  auto res = validate_item(schema, item_of({{"Intensity", std::string("light")}, {"intensity", std::string("vigorous")}}));
  CHECK_FALSE(res.ok());
}

TEST_CASE("normalize_value examples") {
  auto n = normalize_value(NumberKind{}, "3");
  REQUIRE(n);
  CHECK(std::get<double>(*n.value) == 3.0);

  CHECK_FALSE(normalize_value(LikertKind{1, 5}, "7"));
  CHECK_FALSE(normalize_value(NumberKind{}, "three"));
  CHECK_FALSE(normalize_value(NumberKind{}, "3 km"));

  auto t = normalize_value(TimePointKind{}, "2023-04-01T15:00");
  REQUIRE(t);
  CHECK(std::get<TimePoint>(*t.value) == TimePoint{{2023, 4, 1}, 15, 0});
  CHECK_FALSE(normalize_value(TimePointKind{}, "2023-04-01 15:00"));
  CHECK_FALSE(normalize_value(TimePointKind{}, "2023-02-30T15:00"));
  CHECK_FALSE(normalize_value(DateKind{}, "2023-13-01"));
  CHECK(normalize_value(DateKind{}, "2024-02-29"));
  CHECK_FALSE(normalize_value(DateKind{}, "2023-02-29"));

  auto r = normalize_value(TimeRangeKind{}, "2023-04-01T22:00 to 2023-04-02T06:30");
  REQUIRE(r);
  CHECK(std::get<TimeRange>(*r.value).end == TimePoint{{2023, 4, 2}, 6, 30});
  CHECK_FALSE(normalize_value(TimeRangeKind{}, "2023-04-02T06:30 to 2023-04-01T22:00"));

  auto c = normalize_value(SingleChoiceKind{{"light", "moderate"}}, " Moderate");
  REQUIRE(c);
  CHECK(std::get<std::string>(*c.value) == "moderate");
  CHECK_FALSE(normalize_value(SingleChoiceKind{{"light", "moderate"}}, "lite"));

  auto m = normalize_value(MultiChoiceKind{{"a", "b", "c"}}, "c, a");
  REQUIRE(m);
  CHECK(std::get<ChoiceSet>(*m.value).labels == std::vector<std::string>{"a", "c"});
}

TEST_CASE("render then normalize is the identity for every kind") {
  std::mt19937_64 rng(20240611);
  const std::vector<std::string> opts{"light", "moderate", "vigorous", "very hard", "Ünïcode"};
  const std::vector<FieldKind> kinds{NumberKind{},       LikertKind{-3, 7},      SingleChoiceKind{opts},
                                     MultiChoiceKind{opts}, ShortTextKind{},     LongTextKind{},
                                     DateKind{},         TimePointKind{},        TimeRangeKind{}};
  auto rand_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto rand_date = [&] {
    const int y = rand_int(1900, 2100), mo = rand_int(1, 12);
    const int dim[] = {31, (y % 4 == 0 && (y % 100 != 0 || y % 400 == 0)) ? 29 : 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return Date{y, mo, rand_int(1, dim[mo - 1])};
  };
  auto rand_tp = [&] { return TimePoint{rand_date(), rand_int(0, 23), rand_int(0, 59)}; };

  for (int iter = 0; iter < 2000; ++iter) {
    const auto& kind = kinds[static_cast<std::size_t>(iter) % kinds.size()];
    FieldValue v;
    switch (kind.index()) {
      case 0: {
        const double mant = std::uniform_real_distribution<double>(-1e6, 1e6)(rng);
        v = (iter % 3 == 0) ? std::round(mant) : mant;
        break;
      }
      case 1: v = LikertValue{rand_int(-3, 7)}; break;
      case 2: v = opts[static_cast<std::size_t>(rand_int(0, 4))]; break;
      case 3: {
        ChoiceSet set;
        for (std::size_t i = 0; i < opts.size(); ++i) {
          if (rand_int(0, 1)) set.labels.push_back(opts[i]);
        }
        if (set.labels.empty()) set.labels.push_back(opts[2]);
        v = set;
        break;
      }
      case 4:
      case 5: {
        std::string text;
        const int len = rand_int(1, 30);
        for (int i = 0; i < len; ++i) text += static_cast<char>(rand_int('a', 'z'));
        v = text;
        break;
      }
      case 6: v = rand_date(); break;
      case 7: v = rand_tp(); break;
      default: {
        auto a = rand_tp(), b = rand_tp();
        if (b < a) std::swap(a, b);
        v = TimeRange{a, b};
      }
    }
    const auto wire = render_value(v);
    const auto back = normalize_value(kind, wire);
    INFO("kind " << kind_name(kind) << " wire '" << wire << "'");
    REQUIRE(back);
    CHECK(*back.value == v);
  }
}

TEST_CASE("text helpers") {
  CHECK(case_fold("ÄBC Ωmega") == "äbc ωmega");
  CHECK(trim("  a b \t") == "a b");
  CHECK(normalize_label("  LIGHT ") == "light");
  CHECK(is_valid_utf8("héllo"));
  CHECK_FALSE(is_valid_utf8("\xff\xfe"));
  CHECK(format_number(3.0) == "3");
  CHECK(format_number(2.5) == "2.5");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_timestamp(0) == "1970-01-01T00:00:00Z");
  CHECK(parse_timestamp("2022-03-01T09:00:00Z") == 1646125200);
  CHECK(local_time_point(1646125200, 90) == TimePoint{{2022, 3, 1}, 10, 30});
  CHECK(local_time_point(1646125200, -600) == TimePoint{{2022, 2, 28}, 23, 0});
}

TEST_CASE("schema JSON round trip keeps field order") {
  auto s = fixture::exercise(true);
  s.utc_offset_minutes = -300;
  s.fields.push_back({"Mood", LikertKind{1, 7}, std::nullopt});
  s.fields.push_back({"Tags", MultiChoiceKind{{"x", "y"}}, "tags"});
  const auto j = schema_to_json(s);
  CHECK(j["fields"][0]["name"] == "Exercise");
  CHECK(j["fields"][4]["name"] == "Tags");
  CHECK(schema_from_json(j) == s);
  CHECK(schema_from_json(nlohmann::json::parse(j.dump())) == s);

  CHECK_THROWS_AS(schema_from_json(nlohmann::json::parse(R"({"name":"x","fields":[]})")), std::invalid_argument);
  CHECK_THROWS_AS(schema_from_json(nlohmann::json::parse(
                      R"({"tracker_id":"x","name":"x","fields":[{"name":"a","kind":"colour"}]})")),
                  std::invalid_argument);
}

TEST_CASE("values JSON encodes by kind") {
  const auto s = fixture::exercise(true);
  std::map<std::string, FieldValue> v{{"Exercise", std::string("push-ups")},
                                      {"Repetitions", 3.0},
                                      {"Time", TimePoint{{2022, 3, 1}, 7, 5}}};
  const auto j = values_to_json(s, v);
  CHECK(j["Repetitions"].is_number());
  CHECK(j["Time"] == "2022-03-01T07:05");
  CHECK(values_from_json(s, j) == v);

  // A string in a number field stays a string so validation can report it.
  const auto odd = values_from_json(s, nlohmann::json::parse(R"({"Repetitions":"three"})"));
  CHECK(std::holds_alternative<std::string>(odd.at("Repetitions")));
}
