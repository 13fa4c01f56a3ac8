// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace tdeed::io {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Writes a fixed-size SVG line chart. Output is a pure function of the
/// arguments (deterministic text formatting, fixed style), so regenerating
/// from the same data yields byte-identical files.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

}  // namespace tdeed::io
