#include "rothp/event_sequence.hpp"

#include "rothp/errors.hpp"

namespace rothp {

void EventSequence::validate(int num_types) const {
  if (times.size() != marks.size()) {
    throw DataError("sequence '" + id + "': " + std::to_string(times.size()) + " times vs " +
                    std::to_string(marks.size()) + " marks");
  }
  if (times.empty()) throw DataError("sequence '" + id + "' is empty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw DataError("sequence '" + id + "': timestamps not strictly increasing at position " +
                      std::to_string(i));
    }
    if (marks[i] < 0 || marks[i] >= num_types) {
      throw DataError("sequence '" + id + "': mark " + std::to_string(marks[i]) +
                      " out of range [0," + std::to_string(num_types) + ") at position " +
                      std::to_string(i));
    }
  }
}

EventSequence shifted(const EventSequence& seq, double sigma) {
  EventSequence out = seq;
  for (double& t : out.times) t += sigma;
  return out;
}

}  // namespace rothp
