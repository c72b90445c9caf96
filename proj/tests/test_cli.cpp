#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>

#include <filesystem>
#include <sstream>

#include "bwmodel/cli.hpp"
#include "subprocess.hpp"

using namespace bwmodel;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

struct Out {
  int code;
  std::string out;
  std::string err;
};

Out run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bwmodel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST(Cli, EvaluateJson) {
  auto r = run_cli({"evaluate", "--system", "traditional", "--mode", "performance", "--sla", "10ms",
                    "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["design"]["compute_chips"], 3200);
  EXPECT_EQ(j["metrics"]["overprovision_factor"], 50.0);
}

TEST(Cli, EvaluateTableAndCsv) {
  auto t = run_cli({"evaluate", "--system", "die-stacked"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("die-stacked"), std::string::npos);
  auto c = run_cli({"evaluate", "--system", "die-stacked", "--mode", "power", "--budget", "1MW", "--format", "csv"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(first_line(c.out), csv_header());
}

TEST(Cli, SweepCsvHeader) {
  auto r = run_cli({"sweep", "--var", "sla", "--values", "10ms,100ms,1s"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(r.out),
            "system,variable,value,response_time_s,total_power_w,mem_power_w,compute_power_w,overhead_power_w,"
            "capacity_bytes,overprovision,energy_j,blades,chips,modules,active_cores,feasible");
  int lines = 0;
  for (char ch : r.out) lines += ch == '\n';
  EXPECT_EQ(lines, 10);
}

TEST(Cli, SweepLogRangeAndSingleton) {
  auto r = run_cli({"sweep", "--var", "budget", "--log-range", "10kW:1MW:5", "--systems", "die-stacked"});
  ASSERT_EQ(r.code, 0) << r.err;
  int lines = 0;
  for (char ch : r.out) lines += ch == '\n';
  EXPECT_EQ(lines, 6);
  auto one = run_cli({"sweep", "--var", "sla", "--values", "10ms", "--systems", "traditional", "--format", "json"});
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(json::parse(one.out).size(), 1u);
}

TEST(Cli, SweepInfeasibleRowsStayInOutput) {
  auto r = run_cli({"sweep", "--var", "budget", "--values", "100W,1MW", "--systems", "traditional"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find(",false\n"), std::string::npos);
  EXPECT_NE(r.out.find(",true\n"), std::string::npos);
}

TEST(Cli, BadArgumentsExitTwo) {
  EXPECT_EQ(run_cli({"sweep", "--var", "sla", "--values", ""}).code, 2);
  EXPECT_EQ(run_cli({"sweep", "--var", "sla", "--values", "10ms,"}).code, 2);
  EXPECT_EQ(run_cli({"sweep", "--var", "sla"}).code, 2);
  EXPECT_EQ(run_cli({"evaluate"}).code, 2);
  EXPECT_EQ(run_cli({"evaluate", "--system", "nope"}).code, 2);
  EXPECT_EQ(run_cli({"evaluate", "--system", "traditional", "--mode", "performance"}).code, 2);
  EXPECT_EQ(run_cli({"evaluate", "--system", "traditional", "--sla", "10W", "--mode", "performance"}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  auto r = run_cli({"evaluate", "--system", "nope"});
  auto j = json::parse(first_line(r.err));
  EXPECT_EQ(j["code"], "bad_request");
  EXPECT_NE(j["message"].get<std::string>().find("traditional"), std::string::npos);
}

TEST(Cli, InfeasibleExitsThree) {
  auto r = run_cli({"evaluate", "--system", "traditional", "--mode", "power", "--budget", "100W"});
  EXPECT_EQ(r.code, 3);
  auto j = json::parse(first_line(r.err));
  EXPECT_EQ(j["code"], "infeasible");
  EXPECT_EQ(j["detail"]["minimum_budget"], "5888W");
}

TEST(Cli, NoCrossoverExitsFour) {
  auto r = run_cli({"crossover", "--a", "traditional", "--b", "traditional"});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(json::parse(first_line(r.err))["code"], "no_crossover");
}

TEST(Cli, Crossover) {
  auto r = run_cli({"crossover", "--accessed-percent", "50", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(parse_time(json::parse(r.out)["crossover_value"].get<std::string>()).value(), 0.155, 0.005);
  auto t = run_cli({"crossover"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("crossover at SLA"), std::string::npos);
}

TEST(Cli, Reports) {
  auto e = run_cli({"report", "energy", "--format", "csv"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(first_line(e.out), "system,energy_j,response_time_s,total_power_w");
  auto b = run_cli({"report", "breakdown", "--budget", "1MW", "--format", "json"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(json::parse(b.out).size(), 3u);
  EXPECT_EQ(run_cli({"report", "nonsense"}).code, 2);
}

TEST(Cli, CommonWorkloadFlags) {
  auto r = run_cli({"evaluate", "--system", "big-memory", "--db-size", "32TB", "--accessed", "3.2TB", "--format",
                    "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["design"]["compute_chips"], 16);
  EXPECT_EQ(parse_time(j["metrics"]["response_time"].get<std::string>()).value(),
            3.2 * kTiB / (16 * 192.0 * kGiB));
  auto pct = run_cli({"evaluate", "--system", "traditional", "--accessed", "40%", "--format", "json"});
  EXPECT_EQ(parse_time(json::parse(pct.out)["metrics"]["response_time"].get<std::string>()).value(), 1.0);
}

TEST(Cli, ConfigRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "bwmodel_cli_config.json";
  auto r = run_cli({"config", "--config", BWMODEL_SOURCE_DIR "/tools/configs/dense-memory.json", "--out",
                    path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = load_config(path.string());
  EXPECT_EQ(*doc.systems["die-stacked"].module_capacity, Bytes(64 * kGiB));
  auto ev = run_cli({"evaluate", "--system", "die-stacked", "--config", path.string(), "--format", "json"});
  EXPECT_EQ(json::parse(ev.out)["design"]["compute_chips"], 256);
  std::filesystem::remove(path);
  EXPECT_EQ(run_cli({"config", "--config", "/nonexistent.json"}).code, 2);
}

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  auto v = run_cli({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find(kVersion), std::string::npos);
}

TEST(CliProcess, ExitCodesFromBinary) {
  EXPECT_EQ(sub::run({BWMODEL_CLI_PATH, "evaluate", "--system", "traditional"}).exit_code, 0);
  EXPECT_EQ(sub::run({BWMODEL_CLI_PATH, "evaluate", "--system", "x"}).exit_code, 2);
  EXPECT_EQ(sub::run({BWMODEL_CLI_PATH, "evaluate", "--system", "traditional", "--mode", "power", "--budget", "1W"})
                .exit_code,
            3);
  EXPECT_EQ(sub::run({BWMODEL_CLI_PATH, "crossover", "--b", "traditional"}).exit_code, 4);
}

TEST(CliProcess, ServeAnswersAndStopsOnSigterm) {
  sub::Child child({BWMODEL_CLI_PATH, "serve", "--listen", "127.0.0.1:0"});
  auto line = child.read_line(10s);
  ASSERT_EQ(line.rfind("listening on 127.0.0.1:", 0), 0u) << line;
  int port = std::stoi(line.substr(line.rfind(':') + 1));
  ASSERT_GT(port, 0);

  httplib::Client http("127.0.0.1", port);
  auto h = http.Get("/healthz");
  ASSERT_TRUE(h);
  EXPECT_EQ(h->status, 200);
  EXPECT_EQ(json::parse(h->body)["status"], "ok");

  child.signal(SIGTERM);
  auto r = child.wait(10s);
  EXPECT_EQ(r.exit_code, 0) << r.err;
}

TEST(CliProcess, InvalidPortExitsFive) {
  EXPECT_EQ(sub::run({BWMODEL_CLI_PATH, "serve", "--listen", "127.0.0.1:99999"}).exit_code, 5);
  EXPECT_EQ(sub::run({BWMODEL_CLI_PATH, "serve", "--listen", "127.0.0.1:http"}).exit_code, 5);
}

TEST(CliProcess, BusyPortExitsFive) {
  int fd = socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(fd, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  ASSERT_EQ(listen(fd, 1), 0);
  socklen_t len = sizeof addr;
  getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  int port = ntohs(addr.sin_port);
  auto r = sub::run({BWMODEL_CLI_PATH, "serve", "--listen", "127.0.0.1:" + std::to_string(port)}, 10s);
  EXPECT_EQ(r.exit_code, 5);
  close(fd);
}
