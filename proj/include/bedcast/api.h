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
#ifndef BEDCAST_API_H
#define BEDCAST_API_H

#include "bedcast/pipeline.h"
#include "bedcast/projection.h"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace bedcast
{

struct ApiRequest {
    std::string method;
    std::string path;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Projection requests with more runs than this become pollable jobs.
inline constexpr int kSynchronousRunLimit = 50;

/**
 * Request handling over one immutable snapshot. `handle` is pure apart from the job table,
 * so identical requests give identical responses.
 */
class ApiService
{
public:
    /// `projection` supplies the defaults (years, births, reference sets) that POST /project may override.
    ApiService(std::shared_ptr<const ModelSnapshot> snapshot, ProjectionConfig projection = {});
    ~ApiService();

    ApiService(const ApiService&)            = delete;
    ApiService& operator=(const ApiService&) = delete;

    ApiResponse handle(const ApiRequest& request);

    /// Blocks until every submitted job has finished.
    void wait_for_jobs();

    const ModelSnapshot& snapshot() const
    {
        return *m_snapshot;
    }

private:
    struct Job {
        std::string status = "running";
        std::string result;
        std::string error;
        int error_status = 0;
    };

    ApiResponse route(const ApiRequest& request);
    ApiResponse sites() const;
    ApiResponse occupancy(const SiteSnapshot& site) const;
    ApiResponse plan(const SiteSnapshot& site, const std::string& body) const;
    ApiResponse scenario(const SiteSnapshot& site, const std::string& body) const;
    ApiResponse project(const std::string& body);
    ApiResponse job(const std::string& id) const;

    std::shared_ptr<const ModelSnapshot> m_snapshot;
    ProjectionConfig m_projection;
    mutable std::mutex m_jobs_mutex;
    std::map<std::string, Job> m_jobs;
    std::size_t m_next_job = 1;
    std::vector<std::jthread> m_workers;
};

/// Serves `service` over HTTP until the process is stopped. CORS is open to any origin.
void serve(ApiService& service, const std::string& host, int port);

} // namespace bedcast

#endif // BEDCAST_API_H
