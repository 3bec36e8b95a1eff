#pragma once

#include "swiftlearn/core.hpp"
#include "swiftlearn/data.hpp"
#include "swiftlearn/harness.hpp"
#include "swiftlearn/metric.hpp"
#include "swiftlearn/model.hpp"
#include "swiftlearn/scheduler.hpp"
#include "swiftlearn/selector.hpp"
