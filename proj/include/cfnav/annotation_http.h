// Copyright 2026 The cfnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef CFNAV_ANNOTATION_HTTP_H_
#define CFNAV_ANNOTATION_HTTP_H_

#include <map>
#include <string>

#include "cfnav/annotation.h"

#include <httplib.h>

namespace cfnav {

// Routes the annotation endpoints of `server` to HandleRequest.
inline void MountAnnotationRoutes(httplib::Server& server,
                                  AnnotationService& service) {
  auto handle = [&service](const httplib::Request& req,
                           httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    const HttpReply reply =
        HandleRequest(service, req.method, req.path, query, req.body);
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  for (const char* path : {"/task", "/export"}) server.Get(path, handle);
  for (const char* path : {"/target", "/preference"}) server.Post(path, handle);
}

}  // namespace cfnav

#endif  // CFNAV_ANNOTATION_HTTP_H_
