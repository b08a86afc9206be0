/*
* Copyright (C) 2026 bedcast contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#include "bedcast/api.h"
#include "bedcast/error.h"

#include <httplib.h>

namespace bedcast
{

void serve(ApiService& service, const std::string& host, int port)
{
    httplib::Server server;
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        const auto out = service.handle({req.method, req.path, req.body});
        res.status     = out.status;
        res.set_content(out.body, out.content_type);
    };
    server.Get(R"(/.*)", forward);
    server.Post(R"(/.*)", forward);
    server.Options(R"(/.*)", forward);
    if (!server.listen(host, port)) {
        throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
    }
}

} // namespace bedcast
