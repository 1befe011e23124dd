#include "crowdpose/manifest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "crowdpose/errors.hpp"

namespace crowdpose {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw Error("SHA-256 initialisation failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md.data(), &len);
    std::ostringstream s;
    for (unsigned int i = 0; i < len; ++i)
      s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return s.str();
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::vector<std::pair<std::string, std::string>> digest_tree(const std::filesystem::path& path,
                                                             const std::filesystem::path& exclude) {
  namespace fs = std::filesystem;
  std::vector<std::pair<std::string, std::string>> out;
  if (!fs::exists(path)) throw IoError("no such file or directory: " + path.string());
  const fs::path skip = exclude.empty() ? fs::path() : fs::weakly_canonical(exclude);
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      if (!skip.empty() && fs::weakly_canonical(entry.path()) == skip) continue;
      out.emplace_back(entry.path().lexically_relative(path).generic_string(),
                       sha256_file(entry.path()));
    }
  } else {
    out.emplace_back(path.filename().generic_string(), sha256_file(path));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  for (auto& d : digest_tree(path)) inputs.push_back(std::move(d));
}

void RunManifest::add_output(const std::filesystem::path& path,
                             const std::filesystem::path& exclude) {
  for (auto& d : digest_tree(path, exclude)) outputs.push_back(std::move(d));
}

std::string RunManifest::config_digest() const {
  nlohmann::json j = {{"command", command}, {"options", options}, {"inputs", inputs}};
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  return sha256_hex(j.dump());
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["argv"] = argv;
  j["command"] = command;
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  j["options"] = options;
  j["config_digest"] = config_digest();
  j["inputs"] = nlohmann::json::object();
  for (const auto& [p, d] : inputs) j["inputs"][p] = d;
  j["outputs"] = nlohmann::json::object();
  for (const auto& [p, d] : outputs) j["outputs"][p] = d;
  j["duration_seconds"] = duration_seconds;
  j["exit_code"] = exit_code;
  if (!error.empty()) j["error"] = error;
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << to_json().dump(2) << "\n";
}

}  // namespace crowdpose
