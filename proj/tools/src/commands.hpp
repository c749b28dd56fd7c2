#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>

#include "config.hpp"

namespace ndecode::cli {

enum class Format { text, csv };

struct Context {
  ExperimentConfig config;
  std::filesystem::path out_dir = ".";
  std::filesystem::path in_dir = ".";
  std::size_t threads = 1;
  Format format = Format::text;
};

// Each command writes its artifacts plus "<command>.ini" (the effective config) to out_dir and
// returns the process exit code. Library errors propagate as ndecode::Error.
int cmd_gen_cohort(const Context& ctx, std::ostream& log);
int cmd_build_pairs(const Context& ctx, std::ostream& log);
int cmd_train(const Context& ctx, std::ostream& log);
int cmd_eval(const Context& ctx, std::ostream& log);
int cmd_similarity(const Context& ctx, std::ostream& log);
int cmd_shape_check(const Context& ctx, std::ostream& log);
int cmd_sweep(const Context& ctx, std::ostream& log);

}  // namespace ndecode::cli
