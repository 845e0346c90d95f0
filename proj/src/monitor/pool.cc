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

#include "apimon/monitor/pool.h"

namespace apimon::monitor {

void ExecutionUnitPool::on_process_created(const vm::ProcessCreated& ev) {
  if (monitored(ev.creator_pid, ev.creator_tid)) processes_.insert(ev.pid);
}

void ExecutionUnitPool::on_thread_created(const vm::ThreadCreated& ev) {
  if (monitored(ev.creator_pid, ev.creator_tid) && !processes_.count(ev.pid))
    threads_.insert({ev.pid, ev.tid});
}

void ExecutionUnitPool::on_thread_terminated(const vm::ThreadTerminated& ev) {
  threads_.erase({ev.pid, ev.tid});
}

}  // namespace apimon::monitor
