#pragma once

#include <string>

#include "gibbs/observable.hpp"
#include "gibbs/spin_model.hpp"

namespace gibbs::cli {

/// JSON model description -> system. InputError on malformed text (with
/// line:column), unknown keys or inconsistent values.
SpinSystem parse_model(const std::string& text, const std::string& origin = "model");
Observable parse_observable(const std::string& text, const SpinSystem& sys, const std::string& origin = "observable");

SpinSystem load_model(const std::string& path);
Observable load_observable(const std::string& path, const SpinSystem& sys);

}  // namespace gibbs::cli
