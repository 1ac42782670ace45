#pragma once

#include <string>
#include <vector>

#include "cowrite/trace.hpp"

namespace cowrite::test {

inline CanonicalEvent ins(std::size_t offset, const std::string& text, EventSource src = EventSource::User) {
  CanonicalEvent e;
  e.name = EventName::TextInsert;
  e.raw_name = "text-insert";
  e.source = src;
  e.offset = offset;
  e.text = utf8_decode(text);
  return e;
}

inline CanonicalEvent del(std::size_t offset, const std::string& text) {
  CanonicalEvent e;
  e.name = EventName::TextDelete;
  e.raw_name = "text-delete";
  e.offset = offset;
  e.text = utf8_decode(text);
  return e;
}

inline CanonicalEvent named(EventName n, EventSource src = EventSource::User) {
  CanonicalEvent e;
  e.name = n;
  e.raw_name = std::string(to_string(n));
  e.source = src;
  return e;
}

inline CanonicalEvent cursor(EventName n, std::size_t start, std::size_t end) {
  CanonicalEvent e = named(n);
  e.cursor_range = CursorRange{start, end};
  return e;
}

/// A trace whose final text is whatever the events replay to.
inline SessionTrace make_trace(const std::string& prompt, std::vector<CanonicalEvent> events,
                               const std::string& id = "s1", const std::string& author = "a1") {
  SessionTrace t;
  t.meta.session_id = id;
  t.meta.author_id = author;
  t.prompt_text = utf8_decode(prompt);
  for (std::size_t i = 0; i < events.size(); ++i) events[i].timestamp = static_cast<std::int64_t>(i);
  t.events = std::move(events);
  finalize_trace(t);
  return t;
}

}  // namespace cowrite::test
