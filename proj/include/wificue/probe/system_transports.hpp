#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "wificue/probe/probe.hpp"

namespace wificue::probe {

// Production transports. They talk to whatever network the host is on, so
// they only belong in a probe the user asked for.

class SystemResolver : public Resolver {
 public:
  std::vector<std::string> resolve(const std::string& domain) override;
};

class OpenSslTlsConnector : public TlsConnector {
 public:
  explicit OpenSslTlsConnector(std::chrono::seconds timeout = std::chrono::seconds(10))
      : timeout_(timeout) {}
  std::string spki_sha256_b64(const std::string& host, int port) override;

 private:
  std::chrono::seconds timeout_;
};

// Plain GET, redirects not followed.
class HttplibFetcher : public HttpFetcher {
 public:
  explicit HttplibFetcher(std::chrono::seconds timeout = std::chrono::seconds(10))
      : timeout_(timeout) {}
  FetchResponse get(const std::string& url) override;

 private:
  std::chrono::seconds timeout_;
};

// Pin digest of a DER certificate: base64(SHA-256(SubjectPublicKeyInfo)).
// Throws Error(kMalformed) when the bytes are not a certificate.
std::string spki_sha256_b64_from_der(std::string_view cert_der);

inline constexpr std::string_view kDefaultPortalUrl =
    "http://connectivitycheck.gstatic.com/generate_204";

}  // namespace wificue::probe
