// Runs `wplab validate` twice into separate directories, reports criteria 1-9 from the first
// report and criterion 10 from a byte comparison of every artifact.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>
#include <sys/wait.h>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_validate(const std::string& wplab, const std::string& config, const fs::path& out) {
  fs::remove_all(out);
  const std::string cmd = "\"" + wplab + "\" validate --config \"" + config + "\" --out \"" + out.string() + "\"";
  std::cout << "$ " << cmd << std::endl;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::set<std::string> listing(const fs::path& dir) {
  std::set<std::string> names;
  if (fs::exists(dir))
    for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
  return names;
}

std::string summary;

void line(int id, const std::string& name, bool pass, const std::string& detail) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "criterion %2d  %-22s %s  %s\n", id, name.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fputs(buf, stdout);
  summary += buf;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 4) {
    std::cerr << "usage: acceptance WPLAB CONFIG WORKDIR\n";
    return 2;
  }
  const std::string wplab = argv[1], config = argv[2];
  const fs::path work = argv[3];
  const fs::path first = work / "run1", second = work / "run2";

  const int status1 = run_validate(wplab, config, first);
  const int status2 = run_validate(wplab, config, second);

  bool all = true;
  nlohmann::json report;
  try {
    report = nlohmann::json::parse(slurp(first / "report.json"));
  } catch (const std::exception& e) {
    std::cerr << "no readable report: " << e.what() << "\n";
  }
  std::puts("");
  for (int id = 1; id <= 9; ++id) {
    bool pass = false;
    std::string name = "missing", detail;
    if (report.contains("checks"))
      for (const auto& c : report["checks"])
        if (c["id"] == id) {
          name = c["name"];
          pass = c["pass"];
          for (const auto& m : c["metrics"])
            if (m.contains("pass") && !m["pass"].get<bool>()) detail += m["name"].get<std::string>() + " failed; ";
          if (c.contains("error")) detail += c["error"].get<std::string>();
        }
    line(id, name, pass, detail);
    all = all && pass;
  }

  const auto names1 = listing(first), names2 = listing(second);
  bool identical = status1 == status2 && !names1.empty() && names1 == names2;
  std::string detail = std::to_string(names1.size()) + " artifacts";
  for (const auto& n : names1)
    if (!names2.count(n) || slurp(first / n) != slurp(second / n)) {
      identical = false;
      detail += "; differs: " + n;
    }
  line(10, "determinism", identical, detail);
  all = all && identical && status1 == 0;
  std::printf("\nacceptance: %s\n", all ? "PASS" : "FAIL");
  std::ofstream(work / "summary.txt") << summary << "acceptance: " << (all ? "PASS" : "FAIL") << "\n";
  return all ? 0 : 1;
}
