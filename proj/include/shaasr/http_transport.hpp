// shaasr/http_transport.hpp

// Copyright 2026  The shaasr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHAASR_HTTP_TRANSPORT_HPP_
#define SHAASR_HTTP_TRANSPORT_HPP_

#include <httplib.h>

#include <memory>
#include <string>

#include "shaasr/translit.hpp"

namespace shaasr {

/// Real HTTP transport for the remote transliteration service.
class HttplibTransport : public Transport {
 public:
  explicit HttplibTransport(const EndpointConfig& cfg)
      : client_(cfg.host, cfg.port) {
    auto secs = static_cast<time_t>(cfg.timeout_sec);
    auto usecs = static_cast<time_t>((cfg.timeout_sec - static_cast<double>(secs)) * 1e6);
    client_.set_connection_timeout(secs, usecs);
    client_.set_read_timeout(secs, usecs);
  }

  HttpResponse post(const std::string& path, const std::string& json_body) override {
    auto res = client_.Post(path, json_body, "application/json");
    if (!res) {
      SHAASR_THROW(ErrKind::kService, "service error: transport failure (%d)",
                   static_cast<int>(res.error()));
    }
    return HttpResponse{res->status, res->body};
  }

 private:
  httplib::Client client_;
};

}  // namespace shaasr

#endif  // SHAASR_HTTP_TRANSPORT_HPP_
