#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "dagkit/corpus_miner.hpp"
#include "dagkit/python_lexer.hpp"
#include "fixtures.hpp"

using namespace dagkit;
using fixtures::spec;

namespace {

std::uint64_t count_of(std::string_view text, const std::string& name) {
  return count_occurrences(text, {name}).at(name);
}

ApiIndex mining_index() {
  return ApiIndex::build({spec(Provider::AWS, "glue", "create_job"), spec(Provider::AWS, "sqs", "put_x"),
                          spec(Provider::Azure, "storage", "upload_blob")});
}

std::uint64_t record_count(const std::vector<FrequencyRecord>& records, const std::string& name) {
  for (const auto& r : records) {
    if (r.api_name == name) return r.count;
  }
  FAIL("no record for " << name);
  return 0;
}

}  // namespace

TEST_CASE("classify_frequency boundaries") {
  CHECK(classify_frequency(0) == FrequencyClass::Low);
  CHECK(classify_frequency(10) == FrequencyClass::Low);
  CHECK(classify_frequency(11) == FrequencyClass::Medium);
  CHECK(classify_frequency(100) == FrequencyClass::Medium);
  CHECK(classify_frequency(101) == FrequencyClass::High);
  CHECK(classify_frequency(UINT64_MAX) == FrequencyClass::High);
  for (std::uint64_t c = 0; c < 300; ++c) {
    CHECK(static_cast<int>(classify_frequency(c)) <= static_cast<int>(classify_frequency(c + 1)));
  }
  CHECK(parse_frequency_class("Medium") == FrequencyClass::Medium);
  CHECK(to_string(FrequencyClass::High) == "high");
}

TEST_CASE("count_occurrences examples") {
  CHECK(count_of("client.put_x(a)\nput_x(b)", "put_x") == 2);
  CHECK(count_of("def put_x(a): pass", "put_x") == 1);
  CHECK(count_of("# put_x(1)\ns = 'put_x(2)'", "put_x") == 0);
}

TEST_CASE("count_occurrences edge cases") {
  CHECK(count_of("y = put_x(1)", "put_x") == 1);
  CHECK(count_of("f(put_x(1), put_x(2))", "put_x") == 2);
  CHECK(count_of("my_put_x(1)", "put_x") == 0);
  CHECK(count_of("put_xy(1)", "put_x") == 0);
  CHECK(count_of("put_x = 3", "put_x") == 0);
  CHECK(count_of("put_x (1)", "put_x") == 0);
  CHECK(count_of("s = \"\"\"\nput_x(1)\n\"\"\"\nput_x(2)", "put_x") == 1);
  CHECK(count_of("s = f'{put_x(1)}'", "put_x") == 0);
  CHECK(count_of("async def put_x():\n  await c.put_x()", "put_x") == 2);
  auto both = count_occurrences("a.put_x(1); b.create_job()", {"put_x", "create_job", "other"});
  CHECK(both.at("put_x") == 1);
  CHECK(both.at("create_job") == 1);
  CHECK(both.at("other") == 0);
}

TEST_CASE("count_occurrences is additive over concatenation at line boundaries") {
  const std::vector<std::string> parts = {"c.put_x(1)\n", "# put_x(2)\n", "def put_x(): pass\n", "x = 'put_x('\n",
                                          "put_x(put_x(3))\n"};
  std::uint64_t sum = 0;
  std::string all;
  for (const auto& p : parts) {
    sum += count_of(p, "put_x");
    all += p;
  }
  CHECK(count_of(all, "put_x") == sum);
}

TEST_CASE("file_relevant") {
  const auto aws = ProviderFilter::aws();
  const auto azure = ProviderFilter::azure();
  CHECK(file_relevant("src/aws_tools/up.py", "x = 1\n", aws));
  CHECK(file_relevant("src/tools.py", "import boto3\n", aws));
  CHECK(file_relevant("src/tools.py", "from botocore.exceptions import ClientError\n", aws));
  CHECK(file_relevant("src/tools.py", "import os, boto3\n", aws));
  CHECK_FALSE(file_relevant("src/util.py", "import os\n", aws));
  CHECK_FALSE(file_relevant("src/util.py", "# import boto3\n", aws));
  CHECK(file_relevant("src/AZURE/x.py", "", azure));
  CHECK(file_relevant("src/x.py", "from azure.storage.blob import BlobClient\n", azure));
  CHECK_FALSE(file_relevant("src/x.py", "import boto3\n", azure));
  CHECK_FALSE(aws.import_names.empty());
  CHECK_FALSE(aws.path_substrings.empty());
  CHECK_FALSE(azure.import_names.empty());
  CHECK_FALSE(azure.path_substrings.empty());
}

TEST_CASE("mine sums relevant files per provider") {
  fixtures::TempDir dir("corpus");
  dir.write("a/one.py", "import boto3\nc.create_job(Name='x')\n");
  dir.write("b/two.py", "import boto3\nglue.create_job(Name='y')\n");
  dir.write("c/plain.py", "create_job()\nput_x()\n");
  dir.write("aws/notes.txt", "create_job()\n");
  dir.write("azure/blob.py", "client.upload_blob(data)\nclient.create_job()\n");

  const std::vector<ProviderFilter> filters = {ProviderFilter::aws(), ProviderFilter::azure()};
  auto records = mine(dir.path(), mining_index(), filters);
  REQUIRE(records.size() == 3);
  CHECK(records[0].api_name == "create_job");
  CHECK(records[0] == FrequencyRecord{"create_job", 2, FrequencyClass::Low});
  CHECK(record_count(records, "put_x") == 0);
  CHECK(record_count(records, "upload_blob") == 1);

  // Only the AWS filter: Azure names get no record.
  auto aws_only = mine(dir.path(), mining_index(), std::vector<ProviderFilter>{ProviderFilter::aws()});
  CHECK(aws_only.size() == 2);

  CHECK(to_jsonl(records).find(R"({"api_name":"create_job","class":"low","count":2})") != std::string::npos);
}

TEST_CASE("mine on an empty corpus yields zero counts") {
  fixtures::TempDir dir("empty");
  const std::vector<ProviderFilter> filters = {ProviderFilter::aws(), ProviderFilter::azure()};
  auto records = mine(dir.path(), mining_index(), filters);
  CHECK(records.size() == 3);
  for (const auto& r : records) {
    CHECK(r.count == 0);
    CHECK(r.cls == FrequencyClass::Low);
  }
}

TEST_CASE("mine is independent of file layout order") {
  std::vector<std::pair<std::string, std::string>> files;
  for (int i = 0; i < 12; ++i) {
    files.emplace_back("f" + std::to_string(i) + ".py",
                       "import boto3\n" + std::string(static_cast<std::size_t>(i % 3), ' ') + "c.put_x(" +
                           std::to_string(i) + ")\n" + (i % 2 ? "c.create_job()\n" : ""));
  }
  const std::vector<ProviderFilter> filters = {ProviderFilter::aws()};
  std::vector<FrequencyRecord> first;
  std::mt19937 rng(3);
  for (int round = 0; round < 3; ++round) {
    std::shuffle(files.begin(), files.end(), rng);
    fixtures::TempDir dir("order");
    for (std::size_t i = 0; i < files.size(); ++i) {
      // Directory nesting changes with the shuffle, names stay unique.
      dir.write("d" + std::to_string(i % 4) + "/" + files[i].first, files[i].second);
    }
    auto records = mine(dir.path(), mining_index(), filters);
    if (round == 0) {
      first = records;
      CHECK(record_count(records, "put_x") == 12);
      CHECK(record_count(records, "create_job") == 6);
    } else {
      CHECK(records == first);
    }
  }
}

TEST_CASE("mine reports unreadable files and keeps going") {
  fixtures::TempDir dir("unreadable");
  dir.write("ok.py", "import boto3\nc.put_x()\n");
  auto bad = dir.write("bad.py", "import boto3\nc.put_x()\n");
  std::filesystem::permissions(bad, std::filesystem::perms::none);
  const bool readable_anyway = std::ifstream(bad).good();  // running as root

  std::vector<std::string> warnings;
  auto records = mine(dir.path(), mining_index(), std::vector<ProviderFilter>{ProviderFilter::aws()},
                      [&](const std::string& w) { warnings.push_back(w); });
  if (readable_anyway) {
    CHECK(record_count(records, "put_x") == 2);
  } else {
    CHECK(record_count(records, "put_x") == 1);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("bad.py") != std::string::npos);
  }
  std::filesystem::permissions(bad, std::filesystem::perms::owner_all);
}

TEST_CASE("python lexer skips strings and comments") {
  auto toks = lex_python("a = 'x(' # y(\nb(\"\"\"q\nr\"\"\") ** 2");
  std::vector<std::string> texts;
  for (const auto& t : toks) texts.emplace_back(t.text("a = 'x(' # y(\nb(\"\"\"q\nr\"\"\") ** 2"));
  CHECK(texts == std::vector<std::string>{"a", "=", "'x('", "b", "(", "\"\"\"q\nr\"\"\"", ")", "**", "2"});
  CHECK(toks[2].kind == PyTokenKind::String);
  CHECK(toks[7].kind == PyTokenKind::Op);
}
