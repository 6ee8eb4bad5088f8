// Copyright 2026 The STEC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stec/data.hpp"
#include "stec/errors.hpp"

namespace stec {
namespace {

using testing::TempDir;
using testing::read_text;
using testing::write_text;

std::vector<ColumnSpec> toy_columns() {
  return {{"y", ColumnKind::kLabel},
          {"user", ColumnKind::kCategorical},
          {"age", ColumnKind::kNumerical},
          {"note", ColumnKind::kIgnore},
          {"item", ColumnKind::kCategorical}};
}

// Ten rows; row r has user "u<r%3>", age r, item "i<r%2>".
std::string toy_rows(std::size_t n = 10) {
  std::string text;
  for (std::size_t r = 0; r < n; ++r) {
    text += std::to_string(r % 2) + ",u" + std::to_string(r % 3) + "," +
            std::to_string(r) + ",x,i" + std::to_string(r % 2) + "\n";
  }
  return text;
}

DatasetSpec ratio_spec(const std::filesystem::path& file, std::uint64_t seed = 0) {
  DatasetSpec spec;
  spec.path = file;
  spec.columns = toy_columns();
  spec.seed = seed;
  return spec;
}

EncodedSet counting_set(std::size_t n) {
  EncodedSet set;
  set.num_categorical = 1;
  for (std::size_t r = 0; r < n; ++r) {
    set.categorical.push_back(static_cast<std::uint32_t>(r));
    set.labels.push_back(static_cast<std::uint8_t>(r % 2));
  }
  return set;
}

TEST(Schema, ParsesKindsAndSkipsComments) {
  const auto columns = parse_schema("# comment\ny label\n\nc1 categorical\n"
                                    "n1 numerical\nid ignore\n");
  ASSERT_EQ(columns.size(), 4u);
  EXPECT_EQ(columns[0], (ColumnSpec{"y", ColumnKind::kLabel}));
  EXPECT_EQ(columns[1], (ColumnSpec{"c1", ColumnKind::kCategorical}));
  EXPECT_EQ(columns[2], (ColumnSpec{"n1", ColumnKind::kNumerical}));
  EXPECT_EQ(columns[3], (ColumnSpec{"id", ColumnKind::kIgnore}));
}

TEST(Schema, BadLineNamesTheLine) {
  try {
    parse_schema("y label\nc1\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_schema("y label\nc1 fancy\n"), DataError);
}

TEST(Schema, FeatureFieldsFollowFileOrder) {
  DatasetSpec spec;
  spec.columns = toy_columns();
  const FeatureSchema schema = spec.schema();
  ASSERT_EQ(schema.num_fields(), 3u);
  EXPECT_EQ(schema.num_categorical(), 2u);
  EXPECT_EQ(schema.num_numerical(), 1u);
  spec.numeric_mode = NumericMode::kLogBucket;
  EXPECT_EQ(spec.schema().num_categorical(), 3u);
  EXPECT_EQ(spec.schema().num_numerical(), 0u);
}

TEST(DatasetSpec, ValidateRejectsBadConfigurations) {
  TempDir dir("data");
  write_text(dir / "d.csv", toy_rows());
  DatasetSpec spec = ratio_spec(dir / "d.csv");
  EXPECT_NO_THROW(spec.validate());

  DatasetSpec two_labels = spec;
  two_labels.columns[1].kind = ColumnKind::kLabel;
  EXPECT_THROW(two_labels.validate(), ConfigError);

  DatasetSpec no_label = spec;
  no_label.columns[0].kind = ColumnKind::kIgnore;
  EXPECT_THROW(no_label.validate(), ConfigError);

  DatasetSpec bad_ratio = spec;
  bad_ratio.train_ratio = 0.7;
  EXPECT_THROW(bad_ratio.validate(), ConfigError);

  DatasetSpec zero_ratio = spec;
  zero_ratio.train_ratio = 0.9;
  zero_ratio.valid_ratio = 0.0;
  EXPECT_THROW(zero_ratio.validate(), ConfigError);

  DatasetSpec missing = spec;
  missing.path = dir / "absent.csv";
  EXPECT_THROW(missing.validate(), ConfigError);
  EXPECT_THROW(load(missing), ConfigError);

  DatasetSpec partial = spec;
  partial.train_path = dir / "d.csv";
  EXPECT_THROW(partial.validate(), ConfigError);

  EXPECT_THROW(parse_numeric_mode("zscore"), ConfigError);
  EXPECT_EQ(parse_numeric_mode("log_bucket"), NumericMode::kLogBucket);
}

TEST(ReadRecords, ParsesFieldsAndSkipsHeader) {
  TempDir dir("data");
  write_text(dir / "d.csv", "label,user,age,note,item\n1,alice,3.5,zz,book\n0,bob,-1,,pen\n");
  DatasetSpec spec = ratio_spec(dir / "d.csv");
  spec.header = true;
  const auto records = read_records(dir / "d.csv", spec);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].label, 1);
  EXPECT_EQ(records[0].categorical, (std::vector<std::string>{"alice", "book"}));
  EXPECT_EQ(records[0].numerical, (std::vector<double>{3.5}));
  EXPECT_EQ(records[1].label, 0);
  EXPECT_EQ(records[1].numerical, (std::vector<double>{-1.0}));
}

TEST(ReadRecords, ToleratesCrlfAndBlankLines) {
  TempDir dir("data");
  write_text(dir / "d.csv", "1,u,1,x,i\r\n\n0,v,2,x,j\r\n");
  const auto records = read_records(dir / "d.csv", ratio_spec(dir / "d.csv"));
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].categorical[1], "i");
  EXPECT_EQ(records[1].categorical, (std::vector<std::string>{"v", "j"}));
}

TEST(ReadRecords, CustomDelimiter) {
  TempDir dir("data");
  write_text(dir / "d.tsv", "1\tu\t2\tx\ti\n");
  DatasetSpec spec = ratio_spec(dir / "d.tsv");
  spec.delimiter = '\t';
  const auto records = read_records(dir / "d.tsv", spec);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].categorical, (std::vector<std::string>{"u", "i"}));
}

TEST(ReadRecords, MalformedRowNamesFileAndLine) {
  TempDir dir("data");
  const auto file = dir / "d.csv";
  write_text(file, "1,u,1,x,i\n0,u,2,x,i\n1,u,3,x\n");
  try {
    read_records(file, ratio_spec(file));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find(file.string() + ":3:"), std::string::npos) << what;
    EXPECT_NE(what.find("expected 5 columns, found 4"), std::string::npos) << what;
  }
}

TEST(ReadRecords, NonBinaryLabelIsRejected) {
  TempDir dir("data");
  const auto file = dir / "d.csv";
  write_text(file, "1,u,1,x,i\n2,u,2,x,i\n");
  try {
    read_records(file, ratio_spec(file));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find(":2:"), std::string::npos) << what;
    EXPECT_NE(what.find("not binary"), std::string::npos) << what;
  }
}

TEST(ReadRecords, UnparsableNumberIsRejected) {
  TempDir dir("data");
  const auto file = dir / "d.csv";
  write_text(file, "1,u,abc,x,i\n");
  EXPECT_THROW(read_records(file, ratio_spec(file)), DataError);
  write_text(file, "1,u,nan,x,i\n");
  EXPECT_THROW(read_records(file, ratio_spec(file)), DataError);
}

TEST(LogBucket, MapsValuesToTokens) {
  TempDir dir("data");
  const auto file = dir / "d.csv";
  write_text(file, "1,u,1,x,i\n1,u,2,x,i\n1,u,3,x,i\n1,u,10,x,i\n1,u,100,x,i\n");
  DatasetSpec spec = ratio_spec(file);
  spec.numeric_mode = NumericMode::kLogBucket;
  const auto records = read_records(file, spec);
  ASSERT_EQ(records.size(), 5u);
  std::vector<std::string> tokens;
  for (const auto& r : records) {
    ASSERT_EQ(r.categorical.size(), 3u);
    EXPECT_TRUE(r.numerical.empty());
    tokens.push_back(r.categorical[1]);
  }
  // floor(ln(v)^2) above 2, the integer value otherwise.
  const auto bucket = [](double v) {
    return std::to_string(static_cast<long>(std::floor(std::log(v) * std::log(v))));
  };
  EXPECT_EQ(tokens, (std::vector<std::string>{"1", "2", bucket(3), bucket(10), bucket(100)}));
  EXPECT_EQ(bucket(10), "5");
  EXPECT_EQ(bucket(100), "21");
}

TEST(Split, ToyTenRowsPartitionIsDeterministic) {
  const SplitIndices a = split_indices(10, 0.8, 0.1, 42);
  const SplitIndices b = split_indices(10, 0.8, 0.1, 42);
  EXPECT_EQ(a.train.size(), 8u);
  EXPECT_EQ(a.valid.size(), 1u);
  EXPECT_EQ(a.test.size(), 1u);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.valid, b.valid);
  EXPECT_EQ(a.test, b.test);
  std::vector<std::size_t> all = a.train;
  all.insert(all.end(), a.valid.begin(), a.valid.end());
  all.insert(all.end(), a.test.begin(), a.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(all[i], i);
}

TEST(Split, PartitionPropertyOverSizesAndSeeds) {
  for (std::size_t n : {3u, 7u, 10u, 101u, 1000u}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SplitIndices s = split_indices(n, 0.8, 0.1, seed);
      std::set<std::size_t> seen;
      for (const auto* part : {&s.train, &s.valid, &s.test}) {
        for (std::size_t i : *part) {
          EXPECT_LT(i, n);
          EXPECT_TRUE(seen.insert(i).second) << "index " << i << " repeated";
        }
      }
      EXPECT_EQ(seen.size(), n);
      EXPECT_EQ(s.train.size(), static_cast<std::size_t>(std::llround(0.8 * n)));
    }
  }
}

TEST(Split, DifferentSeedsGiveDifferentAssignments) {
  const SplitIndices a = split_indices(1000, 0.8, 0.1, 1);
  const SplitIndices b = split_indices(1000, 0.8, 0.1, 2);
  EXPECT_NE(a.test, b.test);
}

TEST(Load, RatioSplitRecordsMatchIndices) {
  TempDir dir("data");
  write_text(dir / "d.csv", toy_rows());
  const DatasetSpec spec = ratio_spec(dir / "d.csv", 3);
  const LoadedData data = load(spec);
  ASSERT_TRUE(data.indices.has_value());
  const auto all = read_records(spec.path, spec);
  ASSERT_EQ(data.train.size(), data.indices->train.size());
  for (std::size_t k = 0; k < data.train.size(); ++k) {
    EXPECT_EQ(data.train[k], all[data.indices->train[k]]);
  }
  for (std::size_t k = 0; k < data.test.size(); ++k) {
    EXPECT_EQ(data.test[k], all[data.indices->test[k]]);
  }
}

TEST(Load, ReingestionIsIdempotentAndLeavesSourceUntouched) {
  TempDir dir("data");
  write_text(dir / "d.csv", toy_rows(50));
  const std::string before = read_text(dir / "d.csv");
  const DatasetSpec spec = ratio_spec(dir / "d.csv", 9);
  const PreparedData a = prepare(load(spec), 1);
  const PreparedData b = prepare(load(spec), 1);
  EXPECT_EQ(a.train.categorical, b.train.categorical);
  EXPECT_EQ(a.train.numerical, b.train.numerical);
  EXPECT_EQ(a.test.labels, b.test.labels);
  EXPECT_EQ(a.split->train, b.split->train);
  EXPECT_EQ(a.vocab.field(0).values, b.vocab.field(0).values);
  EXPECT_EQ(read_text(dir / "d.csv"), before);
}

TEST(Load, PreSplitFilesAreHonored) {
  TempDir dir("data");
  write_text(dir / "train.csv", "1,a,1,x,p\n0,b,2,x,q\n");
  write_text(dir / "valid.csv", "1,a,3,x,p\n");
  write_text(dir / "test.csv", "0,c,4,x,q\n1,a,5,x,p\n");
  DatasetSpec spec;
  spec.columns = toy_columns();
  spec.train_path = dir / "train.csv";
  spec.valid_path = dir / "valid.csv";
  spec.test_path = dir / "test.csv";
  const LoadedData data = load(spec);
  EXPECT_FALSE(data.indices.has_value());
  EXPECT_EQ(data.train.size(), 2u);
  EXPECT_EQ(data.valid.size(), 1u);
  EXPECT_EQ(data.test.size(), 2u);
  EXPECT_EQ(data.test[0].categorical[0], "c");
}

TEST(Load, EmptyTrainingFileIsRejected) {
  TempDir dir("data");
  write_text(dir / "train.csv", "");
  write_text(dir / "valid.csv", "1,a,3,x,p\n");
  write_text(dir / "test.csv", "1,a,3,x,p\n");
  DatasetSpec spec;
  spec.columns = toy_columns();
  spec.train_path = dir / "train.csv";
  spec.valid_path = dir / "valid.csv";
  spec.test_path = dir / "test.csv";
  EXPECT_THROW(load(spec), DataError);
  EXPECT_THROW(prepare_streaming(spec), DataError);
}

class PreSplitFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    write_text(dir_ / "train.csv", "1,a,1,x,p\n0,b,3,x,q\n1,a,2,x,p\n");
    write_text(dir_ / "valid.csv", "1,b,2,x,p\n");
    write_text(dir_ / "test.csv", "0,zzz,9,x,q\n1,a,0,x,new\n");
    spec_.columns = toy_columns();
    spec_.train_path = dir_ / "train.csv";
    spec_.valid_path = dir_ / "valid.csv";
    spec_.test_path = dir_ / "test.csv";
  }

  TempDir dir_{"data"};
  DatasetSpec spec_;
};

TEST_F(PreSplitFixture, TestOnlyValuesMapToOov) {
  const PreparedData data = prepare(load(spec_), 1);
  const auto& users = data.vocab.field(0);
  const auto& items = data.vocab.field(1);
  EXPECT_EQ(users.values, (std::vector<std::string>{"a", "b"}));
  // Row 0 of test has user "zzz", row 1 has item "new": neither in train.
  EXPECT_EQ(data.test.categorical[0], users.oov());
  EXPECT_EQ(data.test.categorical[3], items.oov());
  EXPECT_EQ(data.test.categorical[2], users.lookup("a"));
}

TEST_F(PreSplitFixture, NormalizerFitsTrainingSplitOnly) {
  const PreparedData data = prepare(load(spec_), 1);
  EXPECT_DOUBLE_EQ(data.normalizer.min[0], 1.0);
  EXPECT_DOUBLE_EQ(data.normalizer.max[0], 3.0);
  EXPECT_DOUBLE_EQ(data.train.numerical[0], 0.0);
  EXPECT_DOUBLE_EQ(data.train.numerical[1], 1.0);
  EXPECT_DOUBLE_EQ(data.valid.numerical[0], 0.5);
}

TEST_F(PreSplitFixture, SummaryCountsInstancesFieldsFeatures) {
  const PreparedData data = prepare(load(spec_), 1);
  EXPECT_EQ(data.summary.instances, 6u);
  EXPECT_EQ(data.summary.fields, 3u);
  EXPECT_EQ(data.summary.features, 2u + 2u + 1u);
}

TEST_F(PreSplitFixture, StreamingMatchesInMemory) {
  for (std::uint32_t min_freq : {1u, 2u}) {
    spec_.min_freq = min_freq;
    const PreparedData a = prepare(load(spec_), min_freq);
    const PreparedData b = prepare_streaming(spec_);
    for (std::size_t s = 0; s < 2; ++s) {
      EXPECT_EQ(a.vocab.field(s).values, b.vocab.field(s).values);
    }
    EXPECT_EQ(a.normalizer.min, b.normalizer.min);
    EXPECT_EQ(a.normalizer.max, b.normalizer.max);
    for (const auto& [x, y] : {std::pair{&a.train, &b.train}, {&a.valid, &b.valid},
                               {&a.test, &b.test}}) {
      EXPECT_EQ(x->categorical, y->categorical);
      EXPECT_EQ(x->numerical, y->numerical);
      EXPECT_EQ(x->labels, y->labels);
    }
    EXPECT_EQ(a.summary.features, b.summary.features);
  }
}

TEST(PrepareStreaming, RequiresPreSplitFiles) {
  TempDir dir("data");
  write_text(dir / "d.csv", toy_rows());
  EXPECT_THROW(prepare_streaming(ratio_spec(dir / "d.csv")), ConfigError);
}

TEST(Encoded, IndicesStayWithinVocabulary) {
  TempDir dir("data");
  write_text(dir / "d.csv", toy_rows(200));
  const PreparedData data = prepare(load(ratio_spec(dir / "d.csv", 5)), 2);
  for (const auto* set : {&data.train, &data.valid, &data.test}) {
    for (std::size_t r = 0; r < set->size(); ++r) {
      for (std::size_t s = 0; s < set->num_categorical; ++s) {
        EXPECT_LE(set->categorical[r * set->num_categorical + s],
                  data.vocab.field(s).oov());
      }
    }
  }
}

TEST(Encoded, GatherAndSliceBounds) {
  const EncodedSet set = counting_set(5);
  const Batch b = set.slice(1, 4);
  EXPECT_EQ(b.size, 3u);
  EXPECT_EQ(b.categorical, (std::vector<std::uint32_t>{1, 2, 3}));
  EXPECT_THROW(set.slice(3, 6), ValueError);
  EXPECT_THROW(set.slice(4, 3), ValueError);
  const std::vector<std::size_t> rows = {0, 7};
  EXPECT_THROW(set.gather(rows), ValueError);
}

TEST(BatchStream, TenRecordsInBatchesOfFour) {
  const EncodedSet set = counting_set(10);
  BatchStream stream(set, 4);
  EXPECT_EQ(stream.num_batches(), 3u);
  std::vector<std::size_t> sizes;
  std::vector<std::uint32_t> seen;
  Batch batch;
  while (stream.next(batch)) {
    sizes.push_back(batch.size);
    seen.insert(seen.end(), batch.categorical.begin(), batch.categorical.end());
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{4, 4, 2}));
  EXPECT_EQ(seen, (std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
}

TEST(BatchStream, SeededOrderIsReproducibleAndCoversEveryRecord) {
  const EncodedSet set = counting_set(100);
  const auto flatten = [&](std::uint64_t seed) {
    std::vector<std::uint32_t> out;
    for (const Batch& b : batches(set, 7, seed)) {
      out.insert(out.end(), b.categorical.begin(), b.categorical.end());
    }
    return out;
  };
  const auto a = flatten(11);
  const auto b = flatten(11);
  const auto c = flatten(12);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  auto sa = a;
  auto sc = c;
  std::sort(sa.begin(), sa.end());
  std::sort(sc.begin(), sc.end());
  EXPECT_EQ(sa, sc);
  for (std::uint32_t i = 0; i < 100; ++i) EXPECT_EQ(sa[i], i);
}

TEST(BatchStream, LabelsTravelWithTheirRows) {
  const EncodedSet set = counting_set(33);
  for (const Batch& b : batches(set, 5, 3)) {
    for (std::size_t k = 0; k < b.size; ++k) {
      EXPECT_EQ(b.labels[k], b.categorical[k] % 2);
    }
  }
}

TEST(BatchStream, RejectsZeroBatchSize) {
  const EncodedSet set = counting_set(3);
  EXPECT_THROW(BatchStream(set, 0), ValueError);
}

TEST(Permutation, IsAPermutation) {
  for (std::size_t n : {0u, 1u, 2u, 50u}) {
    auto p = permutation(n, 7);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(p[i], i);
  }
}

}  // namespace
}  // namespace stec
