#include <httplib.h>

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>

#include "epicap/corpus.hpp"
#include "epicap/error.hpp"

namespace epicap {

namespace {

std::string hex_digest(const unsigned char* digest, unsigned len) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("fetch.digest", "SHA-256 computation failed");
  }
  EVP_MD_CTX_free(ctx);
  return hex_digest(digest, len);
}

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("fetch.io", "cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::string fetch_snapshot(const std::string& url, const std::string& dest,
                           const std::optional<std::string>& checksum) {
  // Split scheme://host[:port] from the path.
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error("fetch.url", "url lacks a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  std::string origin =
      path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string path =
      path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  auto res = client.Get(path);
  if (!res)
    throw Error("fetch.network",
                "request to " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error("fetch.http_status", "GET " + url + " returned status " +
                                         std::to_string(res->status));

  if (checksum) {
    std::string got = sha256_hex(res->body);
    if (got != lowercase(*checksum))
      throw Error("fetch.checksum", "checksum mismatch for " + url +
                                        ": expected " + *checksum + ", got " +
                                        got);
  }

  std::string tmp = dest + ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("fetch.io", "cannot write '" + tmp + "'");
    out.write(res->body.data(),
              static_cast<std::streamsize>(res->body.size()));
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw Error("fetch.io", "write to '" + tmp + "' failed");
    }
  }
  if (std::rename(tmp.c_str(), dest.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("fetch.io", "cannot move '" + tmp + "' to '" + dest + "'");
  }
  return dest;
}

}  // namespace epicap
