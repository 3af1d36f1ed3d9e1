#include "doctest.h"
#include "binding_oracle.hpp"
#include "dagkit/errors.hpp"
#include "dagkit/invocation.hpp"
#include "dagkit/io.hpp"
#include "fixtures.hpp"

using namespace dagkit;

namespace {

CallCandidate call(std::string callee, std::size_t positional, std::vector<std::string> keywords) {
  CallCandidate c;
  c.callee_path = std::move(callee);
  c.positional_count = positional;
  c.keyword_names = std::move(keywords);
  return c;
}

CallCandidate extract(std::string_view text) {
  auto c = extract_first_call(text);
  REQUIRE(c.has_value());
  return *c;
}

}  // namespace

TEST_CASE("extract_first_call examples") {
  auto a = extract("client.delete_message(QueueUrl=u, ReceiptHandle=r)");
  CHECK(a.callee_path == "client.delete_message");
  CHECK(a.positional_count == 0);
  CHECK(a.keyword_names == std::vector<std::string>{"QueueUrl", "ReceiptHandle"});
  CHECK(a.span == CharSpan{0, 21});
  CHECK(a.name_span == CharSpan{7, 21});

  auto b = extract("x = foo(bar(1), b=2)");
  CHECK(b.callee_path == "foo");
  CHECK(b.positional_count == 1);
  CHECK(b.keyword_names == std::vector<std::string>{"b"});

  auto c = extract("print('call(' )\ng(a)");
  CHECK(c.callee_path == "g");
  CHECK(c.positional_count == 1);
}

TEST_CASE("extract_first_call details") {
  CHECK_FALSE(extract_first_call("").has_value());
  CHECK_FALSE(extract_first_call("x = 1").has_value());
  CHECK_FALSE(extract_first_call("f(a, b").has_value());
  CHECK_FALSE(extract_first_call("# f(a)\n'g(b)'").has_value());

  auto eq = extract("f(a == b, c=d, e = 1)");
  CHECK(eq.positional_count == 1);
  CHECK(eq.keyword_names == std::vector<std::string>{"c", "e"});

  auto splat = extract("f(*args, **kw)");
  CHECK(splat.positional_count == 1);
  CHECK(splat.keyword_names == std::vector<std::string>{std::string(kKeywordSplat)});

  auto trailing = extract("f(a, b,)");
  CHECK(trailing.positional_count == 2);
  CHECK(extract("f()").positional_count == 0);

  auto nested = extract("f([1, 2], {'a': 1, 'b': (3, 4)}, lambda x: x, key=g(h=1))");
  CHECK(nested.positional_count == 3);
  CHECK(nested.keyword_names == std::vector<std::string>{"key"});

  auto dup = extract("f(a=1, a=2)");
  CHECK(dup.keyword_names == std::vector<std::string>{"a", "a"});

  CHECK(extract("def g(x):\n  return client.h(x)").callee_path == "client.h");
  CHECK(extract("if ok(x): pass").callee_path == "ok");
  CHECK(extract("len(client.list_objects(Bucket=b))").callee_path == "client.list_objects");
  // Only a contiguous dotted path is kept as the callee; the terminal name is what matters.
  CHECK(terminal_name(extract("client . get_object(Bucket=b)").callee_path) == "get_object");
  CHECK(extract("x = f(a)(b)").call_end == 8);
  CHECK(extract("s = \"\"\"f(\"\"\"\ng(1)").callee_path == "g");

  ExtractOptions none;
  none.ignored_callees.clear();
  CHECK(extract_first_call("print(g(1))", none)->callee_path == "print");
}

TEST_CASE("re-parsing the extracted span yields the same call") {
  const std::vector<std::string> texts = {
      "client.delete_message(QueueUrl=u, ReceiptHandle=r)",
      "x = foo(bar(1), b=2)\n",
      "print('call(' )\ng(a)",
      "resp = s3.put_object(\n    Bucket=b,\n    Key=k,\n)\nmore()",
      "  v.get_secret(name, **extra) # done",
  };
  for (const auto& t : texts) {
    auto first = extract(t);
    const std::string again(t.substr(first.span.begin, first.call_end - first.span.begin));
    auto second = extract(again);
    CHECK(second.callee_path == first.callee_path);
    CHECK(second.positional_count == first.positional_count);
    CHECK(second.keyword_names == first.keyword_names);
    CHECK(second.span.size() == first.span.size());
    CHECK(t.substr(first.name_span.begin, first.name_span.size()) == terminal_name(first.callee_path));
  }
}

TEST_CASE("bind examples") {
  auto spec_ab = fixtures::spec(Provider::AWS, "s", "f", {"a"}, {"b"});
  CHECK(bind(spec_ab, call("f", 0, {"a"}), BindMode::KeywordOnly) == Verdict::ok());

  auto spec_a = fixtures::spec(Provider::AWS, "s", "f", {"a"});
  auto unknown = bind(spec_a, call("f", 0, {"b"}), BindMode::KeywordOnly);
  CHECK(unknown.reason == VerdictReason::UnknownKeyword);
  CHECK(unknown.detail == "b");
  CHECK_FALSE(unknown.valid);
  CHECK(bind(spec_a, call("f", 0, {}), BindMode::KeywordOnly).reason == VerdictReason::MissingRequired);

  auto spec_2 = fixtures::spec(Provider::Azure, "s", "f", {"a", "b"});
  auto dup = bind(spec_2, call("f", 1, {"a"}), BindMode::PositionalOrKeyword);
  CHECK(dup.reason == VerdictReason::DuplicateKeyword);
  CHECK(dup.detail == "a");
  CHECK(bind(spec_2, call("x.f", 2, {}), BindMode::KeywordOnly).reason == VerdictReason::TooManyPositional);
  CHECK(bind(spec_2, call("x.f", 2, {}), BindMode::PositionalOrKeyword) == Verdict::ok());
  CHECK(bind(spec_2, call("f", 0, {"a", "b", std::string(kKeywordSplat)}), BindMode::KeywordOnly).reason ==
        VerdictReason::UnknownKeyword);

  CHECK_THROWS_AS(bind(spec_2, call("g", 0, {}), BindMode::KeywordOnly), ContractError);
}

TEST_CASE("bind agrees with the brute-force oracle on small cases") {
  const std::vector<std::string> alphabet = {"r0", "r1", "o0", "o1", "zz"};
  for (std::size_t r = 0; r <= 2; ++r) {
    for (std::size_t o = 0; o <= 2; ++o) {
      auto spec = fixtures::spec(Provider::AWS, "s", "f");
      for (std::size_t i = 0; i < r; ++i) spec.required_params.push_back("r" + std::to_string(i));
      for (std::size_t i = 0; i < o; ++i) spec.optional_params.push_back("o" + std::to_string(i));
      for (std::size_t p = 0; p <= 3; ++p) {
        for (std::size_t n = 0; n + p <= 3; ++n) {
          std::size_t combos = 1;
          for (std::size_t i = 0; i < n; ++i) combos *= alphabet.size();
          for (std::size_t code = 0; code < combos; ++code) {
            std::vector<std::string> kws;
            for (std::size_t i = 0, c = code; i < n; ++i, c /= alphabet.size()) kws.push_back(alphabet[c % alphabet.size()]);
            auto c = call("f", p, kws);
            for (auto mode : {BindMode::KeywordOnly, BindMode::PositionalOrKeyword}) {
              auto got = bind(spec, c, mode);
              auto want = oracle::bind(spec, c, mode);
              CHECK(got.valid == want.valid);
              CHECK(got.reason == want.reason);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("bind modes") {
  CHECK(default_bind_mode(Provider::AWS) == BindMode::KeywordOnly);
  CHECK(default_bind_mode(Provider::Azure) == BindMode::PositionalOrKeyword);
  CHECK(parse_bind_mode(to_string(BindMode::KeywordOnly)) == BindMode::KeywordOnly);
  CHECK(parse_bind_mode(to_string(BindMode::PositionalOrKeyword)) == BindMode::PositionalOrKeyword);
  CHECK_THROWS(parse_bind_mode("loose"));
}

TEST_CASE("taxonomy golden suite") {
  auto index = fixtures::e2e_index();
  auto cases = read_json_file(fixtures::path("fixtures/taxonomy_cases.json"));
  REQUIRE(cases.size() >= 30);
  for (const auto& c : cases) {
    const auto code = c["code"].get<std::string>();
    CAPTURE(code);
    std::optional<BindMode> mode;
    if (c.contains("binding_mode")) mode = parse_bind_mode(c["binding_mode"].get<std::string>());
    auto verdict = validate(extract_first_call(code), c["targets"].get<std::vector<std::string>>(), index, mode);
    CHECK(to_string(verdict.reason) == c["reason"].get<std::string>());
    CHECK(to_string(verdict.category) == c["category"].get<std::string>());
    CHECK(verdict.valid == (verdict.reason == VerdictReason::Ok));
    CHECK(verdict.valid == (verdict.category == HallucinationCategory::None && verdict.reason == VerdictReason::Ok));
  }
}

TEST_CASE("validate categories and errors") {
  auto index = fixtures::e2e_index();
  const std::vector<std::string> job = {"create_model_customization_job"};
  auto v = validate(extract_first_call("bedrock.create_modelcustomization_job(jobName='x')"), job, index);
  CHECK(v.category == HallucinationCategory::NonExistingApi);

  const std::vector<std::string> health = {"get_deployed_application_health"};
  v = validate(extract_first_call("c.get_application_health(application_id='a')"), health, index);
  CHECK(v.category == HallucinationCategory::IncorrectExistingApi);

  v = validate(extract_first_call("c.get_deployed_application_health('n', 'a', not_accepted=1)"), health, index);
  CHECK(v.category == HallucinationCategory::InvalidUsageOfTarget);
  CHECK(v.reason == VerdictReason::UnknownKeyword);

  v = validate(std::nullopt, health, index);
  CHECK(v.reason == VerdictReason::NoCallFound);
  CHECK(v.category == HallucinationCategory::None);
  CHECK_FALSE(v.valid);

  const std::vector<std::string> unknown = {"not_an_api"};
  CHECK_THROWS_AS(validate(std::nullopt, unknown, index), ConfigError);

  auto j = verdict_to_json(v, std::nullopt);
  CHECK(j["reason"] == "no_call_found");
  CHECK(j["callee"].is_null());
}

TEST_CASE("same-named targets in several services bind if any does") {
  auto index = ApiIndex::build({fixtures::spec(Provider::AWS, "bedrock", "create_job", {"jobName"}),
                                fixtures::spec(Provider::AWS, "glue", "create_job", {"Name", "Role"})});
  const std::vector<std::string> t = {"create_job"};
  CHECK(validate(extract_first_call("glue.create_job(Name=n, Role=r)"), t, index).valid);
  CHECK(validate(extract_first_call("b.create_job(jobName=n)"), t, index).valid);
  auto bad = validate(extract_first_call("b.create_job(Other=n)"), t, index);
  CHECK(bad.category == HallucinationCategory::InvalidUsageOfTarget);
  CHECK(bad.reason == VerdictReason::UnknownKeyword);
}

TEST_CASE("reason and category spellings round trip") {
  for (auto r : {VerdictReason::Ok, VerdictReason::MissingRequired, VerdictReason::UnknownKeyword,
                 VerdictReason::DuplicateKeyword, VerdictReason::TooManyPositional, VerdictReason::NoCallFound,
                 VerdictReason::NotInIndex, VerdictReason::NotATarget}) {
    CHECK(parse_verdict_reason(to_string(r)) == r);
  }
  for (auto c : {HallucinationCategory::None, HallucinationCategory::NonExistingApi,
                 HallucinationCategory::IncorrectExistingApi, HallucinationCategory::InvalidUsageOfTarget}) {
    CHECK(parse_hallucination_category(to_string(c)) == c);
  }
}
