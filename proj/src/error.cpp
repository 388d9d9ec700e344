// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include "qchaos/error.hpp"

#include <atomic>
#include <cstdio>

namespace qchaos {

namespace {

void stderr_sink(const char* message, void*) { std::fprintf(stderr, "qchaos: warning: %s\n", message); }

std::atomic<WarningSink> g_sink{&stderr_sink};
std::atomic<void*> g_user{nullptr};

}  // namespace

void set_warning_sink(WarningSink sink, void* user) {
  g_user.store(user);
  g_sink.store(sink ? sink : &stderr_sink);
}

void warn(const std::string& message) { g_sink.load()(message.c_str(), g_user.load()); }

}  // namespace qchaos
