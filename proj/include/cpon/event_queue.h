#ifndef CPON_EVENT_QUEUE_H_
#define CPON_EVENT_QUEUE_H_

#include <cstdint>
#include <queue>
#include <vector>

namespace cpon {

// Declaration order is the tie-break priority for events at equal times:
// departures are released before reports are consumed, reports before the
// cycle boundary that processes them, arrivals before grants that may carry
// them.
enum class EventKind : uint8_t {
  kCircuitExpiry,
  kReportArrivalAtOlt,
  kUpstreamTransmissionEnd,
  kLowTrafficPollRound,
  kCircuitRequestArrival,
  kPacketArrival,
  kCycleStart,
  kGrantStart,
};

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::kCycleStart;
  uint64_t seq = 0;
  // Payload; meaning depends on kind.
  int onu = -1;
  int64_t cycle = 0;
  uint64_t id = 0;
  double value = 0.0;
};

// Orders by (time, kind, insertion sequence).
inline bool Precedes(const Event& a, const Event& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.kind != b.kind) return a.kind < b.kind;
  return a.seq < b.seq;
}

class EventQueue {
 public:
  void Push(Event e) {
    e.seq = next_seq_++;
    heap_.push(e);
  }
  bool empty() const { return heap_.empty(); }
  const Event& top() const { return heap_.top(); }
  Event Pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
  }
  // Sequence number the next pushed event will receive.
  uint64_t next_seq() const { return next_seq_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const { return Precedes(b, a); }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  uint64_t next_seq_ = 0;
};

}  // namespace cpon

#endif  // CPON_EVENT_QUEUE_H_
