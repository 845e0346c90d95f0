// Copyright 2026 The apimon Authors
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

// Execution units attributed to the program under analysis.

#ifndef APIMON_MONITOR_POOL_H_
#define APIMON_MONITOR_POOL_H_

#include <set>

#include "apimon/types.h"
#include "apimon/vm/events.h"

namespace apimon::monitor {

class ExecutionUnitPool {
 public:
  explicit ExecutionUnitPool(Pid root) { processes_.insert(root); }

  bool monitored(Pid pid, Tid tid) const {
    return processes_.count(pid) != 0 || threads_.count({pid, tid}) != 0;
  }

  // Child processes enter whole; threads created by a monitored thread
  // enter individually. Events from unmonitored creators change nothing.
  void on_process_created(const vm::ProcessCreated& ev);
  void on_thread_created(const vm::ThreadCreated& ev);
  void on_thread_terminated(const vm::ThreadTerminated& ev);

  const std::set<Pid>& processes() const { return processes_; }
  const std::set<ThreadKey>& threads() const { return threads_; }

 private:
  std::set<Pid> processes_;
  std::set<ThreadKey> threads_;
};

}  // namespace apimon::monitor

#endif  // APIMON_MONITOR_POOL_H_
