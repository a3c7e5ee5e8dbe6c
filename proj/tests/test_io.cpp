#include <gtest/gtest.h>

#include <sstream>

#include "ofdma/format.hpp"
#include "ofdma/io.hpp"

namespace ofdma::io {
namespace {

TEST(IoTest, ReadsRateCsv) {
  std::istringstream in("# rates 2 3\n1,2,3\n\n# comment\n4, 5 ,6.5\n");
  const RateMatrix r = read_rate_csv(in);
  EXPECT_EQ(r.n_users(), 2u);
  EXPECT_EQ(r.n_bins(), 3u);
  EXPECT_EQ(r(1, 2), 6.5);
  EXPECT_EQ(r(1, 1), 5.0);
}

TEST(IoTest, RateCsvRoundTripsExactly) {
  const RateMatrix r(Matrix::from_rows({{0.1, 1.0 / 3.0, 1e-300}, {12345.678, 0.0, 2.0}}));
  std::ostringstream out;
  write_rate_csv(out, r);
  std::istringstream in(out.str());
  EXPECT_EQ(read_rate_csv(in).values(), r.values());
}

TEST(IoTest, MalformedRateCsv) {
  for (const char* text : {"", "1,2\n", "# rates 2 2\n1,2\n", "# rates 1 2\n1,x\n", "# rates 1 2\n1,2,3\n",
                           "# rates 1 2\n1,-2\n", "# rates 1 2\n1,2\n3,4\n", "# rates 0 2\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_rate_csv(in), InputError) << text;
  }
}

TEST(IoTest, AllocationCsvIsValidated) {
  std::istringstream good("# allocation 2 2\n1,0.25\n0,0.75\n");
  EXPECT_EQ(read_allocation_csv(good).alpha(1, 1), 0.75);
  std::istringstream bad("# allocation 2 1\n0.5\n0.6\n");
  EXPECT_THROW(read_allocation_csv(bad), InputError);
}

TEST(IoTest, ChannelJsonBroadcasts) {
  const auto j = nlohmann::json::parse(R"({"gains": [[1, 3], [0, 7]], "mask": 1, "noise": [1, 2]})");
  const RateMatrix r = compute_rate_matrix(read_channel_json(j));
  EXPECT_DOUBLE_EQ(r(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(r(0, 1), std::log2(2.5));
  EXPECT_EQ(r(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(r(1, 1), std::log2(4.5));
}

TEST(IoTest, ChannelJsonDefaultsNoiseAndNamesFields) {
  const auto ok = nlohmann::json::parse(R"({"gains": [[3]], "mask": [[1]]})");
  EXPECT_DOUBLE_EQ(compute_rate_matrix(read_channel_json(ok))(0, 0), 2.0);
  const auto bad = nlohmann::json::parse(R"({"gains": [[3, 1]], "mask": [1, 2, 3]})");
  try {
    read_channel_json(bad);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(e.field(), "mask");
  }
  EXPECT_THROW(read_channel_json(nlohmann::json::parse(R"({"mask": 1})")), InputError);
}

TEST(IoTest, ParseList) {
  EXPECT_EQ(parse_list("1,1.25", "weights"), (std::vector<double>{1.0, 1.25}));
  EXPECT_THROW(parse_list("1,,2", "weights"), InputError);
}

TEST(IoTest, SimConfigRoundTrip) {
  const auto j = nlohmann::json::parse(R"({
    "schema_version": 1, "case": "case2", "n_bins": 8, "n_trials": 3, "rng_seed": 5,
    "gamma_grid": [0.5], "outage_probs": [0.1],
    "groups": [{"name": "a", "size": 2, "snr_db": 20},
               {"name": "b", "size": 2, "snr_db": 10, "weight": 2},
               {"name": "v", "size": 1, "snr_db": 5, "kind": "voice", "rmin": 0.5}]})");
  const SimJob job = parse_sim_config(j);
  EXPECT_EQ(job.which, SimCase::Case2);
  EXPECT_EQ(job.config.groups[1].weight_or_rmin, 2.0);
  EXPECT_EQ(job.config.groups[2].kind, sim::GroupKind::Voice);
  EXPECT_EQ(parse_sim_config(to_json(job)).config.groups[2].weight_or_rmin, 0.5);
}

TEST(IoTest, SimConfigErrors) {
  EXPECT_THROW(parse_sim_config(nlohmann::json::parse(R"({"gamma_grid": [0.5], "groups": []})")), InputError);
  EXPECT_THROW(parse_sim_config(nlohmann::json::parse(
                   R"({"schema_version": 1, "gamma_grid": [0.5],
                       "groups": [{"size": 1, "snr_db": 1, "kind": "voice"}]})")),
               InputError);
  EXPECT_THROW(parse_sim_config(nlohmann::json::parse(
                   R"({"schema_version": 2, "gamma_grid": [0.5], "groups": [{"size": 1, "snr_db": 1}]})")),
               InputError);
  EXPECT_THROW(parse_sim_config(nlohmann::json::parse(
                   R"({"schema_version": 1, "gamma_grid": [0.5], "groups": [{"size": "x", "snr_db": 1}]})")),
               InputError);
}

TEST(IoTest, Fingerprint) {
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
}

TEST(FormatTest, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(45.0), "45");
  EXPECT_EQ(format_display(1.0 / 3.0), "0.3333");
}

}  // namespace
}  // namespace ofdma::io
