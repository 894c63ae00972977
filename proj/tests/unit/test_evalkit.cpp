#include <doctest.h>

#include "vowelprompt/error.hpp"
#include "vowelprompt/evalkit.hpp"

using namespace vowelprompt;

namespace {
using Strings = std::vector<std::string>;
}

TEST_SUITE("evalkit") {
  TEST_CASE("two-class example") {
    const Strings labels = {"A", "B"};
    const Strings gold = {"A", "A", "A", "B"};
    const Strings pred = {"A", "A", "B", "B"};
    const ConfusionMatrix cm = confusion(gold, pred, labels);
    CHECK(cm.counts == std::vector<std::vector<std::int64_t>>{{2, 1, 0}, {0, 1, 0}});
    const EvalResult r = score(cm);
    // recall A = 2/3, recall B = 1
    CHECK(r.uacc == doctest::Approx((2.0 / 3.0 + 1.0) / 2.0));
    // F1 A = 0.8, F1 B = 2/3, weights 3 and 1
    CHECK(r.wf1 == doctest::Approx((3 * 0.8 + 2.0 / 3.0) / 4.0));
    CHECK(r.uacc == doctest::Approx(0.8333).epsilon(1e-4));
    CHECK(r.wf1 == doctest::Approx(0.7667).epsilon(1e-4));
    CHECK(r.per_class.at("A").precision == doctest::Approx(1.0));
    CHECK(r.per_class.at("B").precision == doctest::Approx(0.5));
    CHECK(r.n == 4);
  }

  TEST_CASE("predictions outside the label set count as wrong") {
    const Strings labels = {"A", "B"};
    const ConfusionMatrix cm = confusion(Strings{"A", "B"}, Strings{"C", ""}, labels);
    CHECK(cm.invalid(0) == 1);
    CHECK(cm.invalid(1) == 1);
    const EvalResult r = score(cm);
    CHECK(r.uacc == 0.0);
    CHECK(r.wf1 == 0.0);
    CHECK(r.per_class.at("A").precision == 0.0);
  }

  TEST_CASE("perfect predictions") {
    const Strings labels = {"x", "y", "z"};
    const Strings gold = {"x", "y", "z", "z", "y"};
    const EvalResult r = score(confusion(gold, gold, labels));
    CHECK(r.uacc == doctest::Approx(1.0));
    CHECK(r.wf1 == doctest::Approx(1.0));
  }

  TEST_CASE("a class with no support does not enter the mean recall") {
    const Strings labels = {"A", "B", "C"};
    const EvalResult r = score(confusion(Strings{"A", "B"}, Strings{"A", "C"}, labels));
    CHECK(r.uacc == doctest::Approx(0.5));
    CHECK(r.per_class.at("C").support == 0);
    CHECK(r.per_class.at("C").f1 == 0.0);
  }

  TEST_CASE("errors") {
    const Strings labels = {"A", "B"};
    CHECK_THROWS_AS(confusion(Strings{"A"}, Strings{}, labels), ValidationError);
    CHECK_THROWS_AS(confusion(Strings{"Q"}, Strings{"A"}, labels), ValidationError);
    CHECK_THROWS_AS(confusion(Strings{"A"}, Strings{"A"}, Strings{}), ValidationError);
    CHECK_THROWS_AS(confusion(Strings{"A"}, Strings{"A"}, Strings{"A", "A"}), ValidationError);
    CHECK_THROWS_AS(score(confusion(Strings{}, Strings{}, labels)), ValidationError);
  }

  TEST_CASE("report layout") {
    const Strings labels = {"A", "B"};
    const ConfusionMatrix cm = confusion(Strings{"A", "B"}, Strings{"A", "?"}, labels);
    const auto j = report_json(cm, score(cm));
    CHECK(j["confusion"]["columns"] == nlohmann::json::array({"A", "B", "invalid"}));
    CHECK(j["per_class"]["B"]["support"] == 1);
    CHECK(j.begin().key() == "n");
  }
}
