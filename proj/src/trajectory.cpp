#include "temporalot/trajectory.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "temporalot/error.hpp"
#include "text_util.hpp"

namespace temporalot {

namespace {

void validate_action_id(const std::string& id, Index i) {
  if (id.empty()) {
    throw ValidationError("frame " + std::to_string(i) + ": empty action id");
  }
  for (char c : id) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '|') {
      throw ValidationError("frame " + std::to_string(i) + ": action id '" + id +
                            "' contains whitespace or '|'");
    }
  }
}

}  // namespace

Trajectory::Trajectory(Matrix features, std::optional<std::vector<std::string>> actions,
                       TrajectoryMeta meta)
    : features_(std::move(features)), actions_(std::move(actions)), meta_(meta) {
  if (features_.rows() < 1) throw ValidationError("trajectory must have at least one frame");
  if (features_.cols() < 1) throw ValidationError("feature dimension must be at least 1");
  for (Index i = 0; i < features_.rows(); ++i) {
    for (Index j = 0; j < features_.cols(); ++j) {
      if (!std::isfinite(features_(i, j))) {
        throw ValidationError("frame " + std::to_string(i) + ", component " + std::to_string(j) +
                              ": non-finite feature value");
      }
    }
  }
  if (actions_) {
    if (static_cast<Index>(actions_->size()) != features_.rows()) {
      throw ValidationError("trajectory has " + std::to_string(features_.rows()) +
                            " frames but " + std::to_string(actions_->size()) + " actions");
    }
    for (std::size_t i = 0; i < actions_->size(); ++i) {
      validate_action_id((*actions_)[i], static_cast<Index>(i));
    }
  }
}

Trajectory Trajectory::from_rows(const std::vector<std::vector<double>>& rows,
                                 std::optional<std::vector<std::string>> actions,
                                 TrajectoryMeta meta) {
  if (rows.empty()) throw ValidationError("trajectory must have at least one frame");
  const std::size_t dim = rows.front().size();
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw ValidationError("frame " + std::to_string(i) + " has dimension " +
                            std::to_string(rows[i].size()) + ", expected " + std::to_string(dim));
    }
    for (std::size_t j = 0; j < dim; ++j) m(i, j) = rows[i][j];
  }
  return Trajectory(std::move(m), std::move(actions), meta);
}

std::span<const double> Trajectory::frame(Index i) const {
  return {features_.data() + i * features_.cols(), static_cast<std::size_t>(features_.cols())};
}

Trajectory Trajectory::with_meta(TrajectoryMeta meta) const {
  Trajectory copy = *this;
  copy.meta_ = meta;
  return copy;
}

bool operator==(const Trajectory& a, const Trajectory& b) {
  if (a.features_.rows() != b.features_.rows() || a.features_.cols() != b.features_.cols()) {
    return false;
  }
  const auto n = static_cast<std::size_t>(a.features_.size());
  if (std::memcmp(a.features_.data(), b.features_.data(), n * sizeof(double)) != 0) return false;
  return a.actions_ == b.actions_;
}

DemoSet::DemoSet(std::vector<Trajectory> demos) : demos_(std::move(demos)) {
  if (demos_.empty()) throw ValidationError("demo set must hold at least one demonstration");
  const Index dim = demos_.front().dim();
  for (std::size_t i = 1; i < demos_.size(); ++i) {
    if (demos_[i].dim() != dim) {
      throw ValidationError("demo " + std::to_string(i) + " has feature dimension " +
                            std::to_string(demos_[i].dim()) + ", expected " +
                            std::to_string(dim));
    }
  }
}

std::string format_trajectory(const Trajectory& t) {
  std::string out = "TRAJ v1 dim=" + std::to_string(t.dim()) +
                    " len=" + std::to_string(t.length()) +
                    " actions=" + (t.has_actions() ? "1" : "0") + "\n";
  for (Index i = 0; i < t.length(); ++i) {
    for (Index j = 0; j < t.dim(); ++j) {
      if (j > 0) out += ' ';
      out += format_double(t.features()(i, j));
    }
    if (t.has_actions()) {
      out += " | ";
      out += (*t.actions())[static_cast<std::size_t>(i)];
    }
    out += '\n';
  }
  return out;
}

Trajectory parse_trajectory(std::string_view text, std::string_view source) {
  const std::string src(source);
  auto lines = detail::split_lines(text);
  if (lines.empty()) throw ParseError(src + ": empty trajectory file");

  auto header = detail::split_ws(lines[0]);
  if (header.size() != 5 || header[0] != "TRAJ" || header[1] != "v1") {
    throw ParseError(src + ": line 1: expected 'TRAJ v1 dim=<D> len=<T> actions=<0|1>'");
  }
  const long dim = detail::parse_key_int(header[2], "dim", source, 1);
  const long len = detail::parse_key_int(header[3], "len", source, 1);
  const std::string_view flag = detail::key_value(header[4], "actions", source);
  if (flag != "0" && flag != "1") throw ParseError(src + ": line 1: actions must be 0 or 1");
  const bool with_actions = flag == "1";

  if (static_cast<long>(lines.size()) - 1 != len) {
    throw ParseError(src + ": header declares len=" + std::to_string(len) + " but file has " +
                     std::to_string(lines.size() - 1) + " records");
  }

  Matrix features(len, dim);
  std::vector<std::string> actions;
  if (with_actions) actions.reserve(static_cast<std::size_t>(len));

  for (long i = 0; i < len; ++i) {
    const std::string ctx = src + ": record " + std::to_string(i) + " (line " +
                            std::to_string(i + 2) + ")";
    std::string_view line = lines[static_cast<std::size_t>(i + 1)];
    std::string_view values = line;
    const auto bar = line.find('|');
    if (with_actions) {
      if (bar == std::string_view::npos) throw ParseError(ctx + ": missing '| <action-id>'");
      values = line.substr(0, bar);
      auto action = detail::split_ws(line.substr(bar + 1));
      if (action.size() != 1) throw ParseError(ctx + ": expected exactly one action id");
      actions.emplace_back(action[0]);
    } else if (bar != std::string_view::npos) {
      throw ParseError(ctx + ": unexpected action column (header says actions=0)");
    }
    auto fields = detail::split_ws(values);
    if (static_cast<long>(fields.size()) != dim) {
      throw ValidationError(ctx + ": expected " + std::to_string(dim) + " values, found " +
                            std::to_string(fields.size()));
    }
    for (long j = 0; j < dim; ++j) features(i, j) = parse_double(fields[j], ctx);
  }

  std::optional<std::vector<std::string>> acts;
  if (with_actions) acts = std::move(actions);
  try {
    return Trajectory(std::move(features), std::move(acts));
  } catch (const ValidationError& e) {
    throw ValidationError(src + ": " + e.what());
  }
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  return parse_trajectory(read_text_file(path), path.string());
}

void save_trajectory(const Trajectory& t, const std::filesystem::path& path) {
  write_text_file(path, format_trajectory(t));
}

Trajectory subsample_demo(const Trajectory& t, int stride) {
  if (stride < 1) throw ArgumentError("stride must be >= 1, got " + std::to_string(stride));
  const Index n = (t.length() + stride - 1) / stride;
  Matrix features(n, t.dim());
  std::optional<std::vector<std::string>> actions;
  if (t.has_actions()) actions.emplace();
  for (Index k = 0; k < n; ++k) {
    const Index src = k * stride;
    features.row(k) = t.features().row(src);
    if (actions) actions->push_back((*t.actions())[static_cast<std::size_t>(src)]);
  }
  return Trajectory(std::move(features), std::move(actions), t.meta());
}

}  // namespace temporalot
