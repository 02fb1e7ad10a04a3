#include "wificue/probe/system_transports.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <sys/time.h>

#include <memory>
#include <stdexcept>

#include <httplib.h>
#include <openssl/bio.h>
#include <openssl/evp.h>
#include <openssl/ssl.h>
#include <openssl/x509.h>

#include "wificue/core/encoding.hpp"
#include "wificue/core/error.hpp"

namespace wificue::probe {
namespace {

std::string spki_digest(X509* cert) {
  EVP_PKEY* key = X509_get0_pubkey(cert);
  if (!key) throw Error(ErrorCode::kMalformed, "certificate has no public key");
  unsigned char* der = nullptr;
  const int len = i2d_PUBKEY(key, &der);
  if (len <= 0) throw Error(ErrorCode::kMalformed, "cannot encode public key");
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int md_len = 0;
  const bool ok = EVP_Digest(der, static_cast<std::size_t>(len), md, &md_len,
                             EVP_sha256(), nullptr) == 1;
  OPENSSL_free(der);
  if (!ok) throw Error(ErrorCode::kMalformed, "SHA-256 failed");
  return base64_encode(std::string_view(reinterpret_cast<const char*>(md), md_len));
}

}  // namespace

std::vector<std::string> SystemResolver::resolve(const std::string& domain) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = getaddrinfo(domain.c_str(), nullptr, &hints, &res);
  if (rc != 0) throw std::runtime_error(gai_strerror(rc));
  std::unique_ptr<addrinfo, decltype(&freeaddrinfo)> guard(res, freeaddrinfo);
  std::vector<std::string> out;
  for (auto* p = res; p; p = p->ai_next) {
    char host[NI_MAXHOST];
    if (getnameinfo(p->ai_addr, p->ai_addrlen, host, sizeof host, nullptr, 0,
                    NI_NUMERICHOST) == 0) {
      out.emplace_back(host);
    }
  }
  return out;
}

std::string spki_sha256_b64_from_der(std::string_view cert_der) {
  const auto* p = reinterpret_cast<const unsigned char*>(cert_der.data());
  std::unique_ptr<X509, decltype(&X509_free)> cert(
      d2i_X509(nullptr, &p, static_cast<long>(cert_der.size())), X509_free);
  if (!cert) throw Error(ErrorCode::kMalformed, "not a DER certificate");
  return spki_digest(cert.get());
}

std::string OpenSslTlsConnector::spki_sha256_b64(const std::string& host, int port) {
  std::unique_ptr<SSL_CTX, decltype(&SSL_CTX_free)> ctx(SSL_CTX_new(TLS_client_method()),
                                                        SSL_CTX_free);
  if (!ctx) throw std::runtime_error("SSL_CTX_new failed");
  // The pin is the check; chain validation would only hide a substituted key
  // behind a generic failure.
  SSL_CTX_set_verify(ctx.get(), SSL_VERIFY_NONE, nullptr);

  std::unique_ptr<BIO, decltype(&BIO_free_all)> bio(BIO_new_ssl_connect(ctx.get()),
                                                    BIO_free_all);
  if (!bio) throw std::runtime_error("BIO_new_ssl_connect failed");
  SSL* ssl = nullptr;
  BIO_get_ssl(bio.get(), &ssl);
  SSL_set_tlsext_host_name(ssl, host.c_str());
  const std::string target = host + ":" + std::to_string(port);
  BIO_set_conn_hostname(bio.get(), target.c_str());

  if (BIO_do_connect(bio.get()) <= 0) throw std::runtime_error("connect failed: " + target);
  int fd = -1;
  BIO_get_fd(bio.get(), &fd);
  if (fd >= 0) {
    timeval tv{static_cast<time_t>(timeout_.count()), 0};
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
  }
  if (BIO_do_handshake(bio.get()) <= 0) throw std::runtime_error("handshake failed: " + target);

  std::unique_ptr<X509, decltype(&X509_free)> cert(SSL_get1_peer_certificate(ssl),
                                                   X509_free);
  if (!cert) throw std::runtime_error("no peer certificate");
  return spki_digest(cert.get());
}

FetchResponse HttplibFetcher::get(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("bad url " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_follow_location(false);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  auto res = client.Get(path);
  if (!res) throw std::runtime_error("fetch failed: " + httplib::to_string(res.error()));
  return {res->status, res->body};
}

}  // namespace wificue::probe
