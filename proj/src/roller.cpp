#include "telextiles/roller.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "telextiles/errors.hpp"

namespace telextiles {

std::int64_t RollerConfig::steps_per_revolution() const {
  return static_cast<std::int64_t>(std::llround(360.0 / step_angle()));
}

int RollerConfig::slot_of(const std::string& sample_id) const {
  const auto it = std::find(slot_samples.begin(), slot_samples.end(), sample_id);
  return it == slot_samples.end() ? -1 : static_cast<int>(it - slot_samples.begin());
}

void RollerConfig::validate() const {
  if (slot_count() < 2) throw ValidationError("roller needs at least two slots");
  if (std::set<std::string>(slot_samples.begin(), slot_samples.end()).size() != slot_samples.size())
    throw ValidationError("roller slot samples must be distinct");
  if (!(full_step_angle > 0.0) || microstep_divisor < 1) throw ValidationError("bad motor step geometry");
  const double steps = 360.0 / step_angle();
  if (std::abs(steps - std::round(steps)) > 1e-9)
    throw ValidationError("360 degrees is not a whole number of (micro)steps");
}

const char* to_string(Direction d) { return d == Direction::CW ? "CW" : "CCW"; }

double slot_angle(int slot_index, int slot_count) {
  if (slot_count < 1 || slot_index < 0 || slot_index >= slot_count)
    throw ValidationError("slot " + std::to_string(slot_index) + " outside [0, " + std::to_string(slot_count) + ")");
  return slot_index * 360.0 / slot_count;
}

double shortest_rotation(double current_deg, double target_deg) {
  if (!std::isfinite(current_deg) || !std::isfinite(target_deg)) throw ValidationError("angles must be finite");
  double d = std::fmod(target_deg - current_deg, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d <= -180.0) d += 360.0;
  return d;
}

StepPlan plan_steps(double delta_deg, const RollerConfig& cfg) {
  StepPlan plan;
  plan.direction = delta_deg < 0 ? Direction::CCW : Direction::CW;
  plan.step_count = static_cast<std::int64_t>(std::llround(std::abs(delta_deg) / cfg.step_angle()));
  return plan;
}

std::string encode_command(double delta_deg) {
  if (!std::isfinite(delta_deg) || std::abs(delta_deg) > 180.0) throw ValidationError("rotation must be within +-180");
  const long long hundredths = std::llround(delta_deg * 100.0);
  const long long mag = hundredths < 0 ? -hundredths : hundredths;
  char buf[32];
  std::snprintf(buf, sizeof buf, "ROT %c%lld.%02lld\n", hundredths < 0 ? '-' : '+', mag / 100, mag % 100);
  return buf;
}

double decode_command(std::string_view frame) {
  constexpr std::string_view kPrefix = "ROT ";
  std::size_t i = 0;
  for (; i < kPrefix.size(); ++i)
    if (i >= frame.size() || frame[i] != kPrefix[i]) throw ProtocolError(i, "expected \"ROT \"");
  if (i >= frame.size() || (frame[i] != '+' && frame[i] != '-')) throw ProtocolError(i, "expected sign");
  const bool negative = frame[i++] == '-';
  auto digit = [&](std::size_t at) { return at < frame.size() && frame[at] >= '0' && frame[at] <= '9'; };
  const std::size_t int_start = i;
  long long whole = 0;
  while (digit(i)) {
    if (i - int_start == 3) throw ProtocolError(i, "too many integer digits");
    whole = whole * 10 + (frame[i++] - '0');
  }
  if (i == int_start) throw ProtocolError(i, "expected digit");
  if (i - int_start > 1 && frame[int_start] == '0') throw ProtocolError(int_start, "leading zero");
  if (i >= frame.size() || frame[i] != '.') throw ProtocolError(i, "expected '.'");
  ++i;
  long long frac = 0;
  for (int k = 0; k < 2; ++k) {
    if (!digit(i)) throw ProtocolError(i, "expected two decimals");
    frac = frac * 10 + (frame[i++] - '0');
  }
  if (i >= frame.size() || frame[i] != '\n') throw ProtocolError(i, "expected newline");
  if (i + 1 != frame.size()) throw ProtocolError(i + 1, "trailing bytes");
  const long long hundredths = whole * 100 + frac;
  if (hundredths > 18000) throw ProtocolError(int_start, "rotation exceeds 180 degrees");
  return (negative ? -hundredths : hundredths) / 100.0;
}

CommandResult apply_command(const MotorState& state, std::string_view frame, const RollerConfig& cfg) {
  CommandResult result{state, "", false};
  double delta = 0.0;
  try {
    delta = decode_command(frame);
  } catch (const ProtocolError& e) {
    result.reply = "ERR " + e.reason() + " at byte " + std::to_string(e.offset()) + "\n";
    return result;
  }
  const StepPlan plan = plan_steps(delta, cfg);
  const std::int64_t revolution = cfg.steps_per_revolution();
  const std::int64_t signed_steps = plan.direction == Direction::CW ? plan.step_count : -plan.step_count;
  result.state.position_steps = ((state.position_steps + signed_steps) % revolution + revolution) % revolution;
  result.reply = std::string("OK ") + to_string(plan.direction) + " " + std::to_string(plan.step_count) + "\n";
  result.ok = true;
  return result;
}

SlotMove goto_slot(const MotorState& state, int slot_index, const RollerConfig& cfg) {
  const double target = slot_angle(slot_index, cfg.slot_count());
  const double delta = shortest_rotation(state.angle(cfg), target);
  SlotMove move;
  move.frame = encode_command(delta);
  move.predicted = apply_command(state, move.frame, cfg).state;
  return move;
}

int current_slot(const MotorState& state, const RollerConfig& cfg) {
  const std::int64_t revolution = cfg.steps_per_revolution();
  const std::int64_t scaled = state.position_steps * cfg.slot_count();
  if (scaled % revolution != 0) return -1;
  return static_cast<int>(scaled / revolution);
}

}  // namespace telextiles
