#pragma once

// Published schemas: backend response payloads, on-disk artifacts and HTTP
// API bodies. Times in artifacts are seconds (3 decimals); backend payloads
// use integer milliseconds.

namespace classmind::detail {

inline constexpr const char* kBuiltinSchemas = R"JSON({
  "caption.v1": {
    "type": "object", "required": ["caption"],
    "properties": {"caption": {"type": "string", "minLength": 1}}
  },
  "hotspots.v1": {
    "type": "object", "required": ["hotspots"],
    "properties": {"hotspots": {"type": "array", "items": {
      "type": "object",
      "required": ["start_ms", "end_ms", "dimension_id", "polarity", "context_summary", "trigger_excerpt"],
      "properties": {
        "start_ms": {"type": "integer", "minimum": 0},
        "end_ms": {"type": "integer", "minimum": 0},
        "dimension_id": {"type": "string", "minLength": 1},
        "polarity": {"enum": ["STRENGTH", "WEAKNESS"]},
        "context_summary": {"type": "string", "minLength": 1},
        "trigger_excerpt": {"type": "string"}
      }}}}
  },
  "guidelines.v1": {
    "type": "object", "required": ["guidelines"],
    "properties": {"guidelines": {"type": "array", "minItems": 1, "maxItems": 5,
                                  "items": {"type": "string", "minLength": 1}}}
  },
  "feedback_draft.v1": {
    "type": "object", "required": ["content", "observed_behaviors", "actionable_advice"],
    "properties": {
      "content": {"type": "string", "minLength": 1},
      "observed_behaviors": {"type": "string", "minLength": 1},
      "actionable_advice": {"type": "string", "minLength": 1}
    }
  },
  "verdict.v1": {
    "type": "object", "required": ["consistent", "rationale"],
    "properties": {"consistent": {"type": "boolean"}, "rationale": {"type": "string"}}
  },
  "embedding.v1": {
    "type": "object", "required": ["values"],
    "properties": {"values": {"type": "array", "minItems": 1, "items": {"type": "number"}}}
  },
  "activities.v1": {
    "type": "object", "required": ["spans"],
    "properties": {"spans": {"type": "array", "items": {
      "type": "object", "required": ["start_ms", "end_ms", "codes"],
      "properties": {
        "start_ms": {"type": "integer", "minimum": 0},
        "end_ms": {"type": "integer", "minimum": 0},
        "codes": {"type": "array", "minItems": 1, "items": {"type": "string", "minLength": 1}}
      }}}}
  },
  "bloom.v1": {
    "type": "object", "required": ["level", "justification"],
    "properties": {
      "level": {"type": "integer", "minimum": 1, "maximum": 6},
      "justification": {"type": "string", "minLength": 1}
    }
  },
  "outline.v1": {
    "type": "object", "required": ["sections"],
    "properties": {"sections": {"type": "array", "minItems": 1, "items": {
      "type": "object", "required": ["start_ms", "end_ms", "heading", "summary"],
      "properties": {
        "start_ms": {"type": "integer", "minimum": 0},
        "end_ms": {"type": "integer", "minimum": 0},
        "heading": {"type": "string", "minLength": 1},
        "summary": {"type": "string", "minLength": 1}
      }}}}
  },
  "search_query.v1": {
    "type": "object", "required": ["query"],
    "properties": {"query": {"type": "string", "minLength": 1}}
  },
  "rerank.v1": {
    "type": "object", "required": ["results"],
    "properties": {"results": {"type": "array", "items": {
      "type": "object", "required": ["clip_id", "explanation"],
      "properties": {
        "clip_id": {"type": "string", "minLength": 1},
        "explanation": {"type": "string", "minLength": 1}
      }}}}
  },

  "artifact.rubric.v1": {
    "type": "object",
    "required": ["schema_version", "rubric_id", "name", "dimensions"],
    "properties": {
      "schema_version": {"enum": [1]},
      "rubric_id": {"type": "string", "minLength": 1},
      "dimensions": {"type": "array", "minItems": 1, "items": {
        "type": "object",
        "required": ["dimension_id", "title", "levels"],
        "properties": {"levels": {"type": "array", "minItems": 2}}
      }}
    }
  },
  "artifact.timeline.v1": {
    "type": "object",
    "required": ["schema_version", "lesson_id", "duration", "turns", "captions", "context_docs"],
    "properties": {
      "schema_version": {"enum": [1]},
      "lesson_id": {"type": "string", "minLength": 1},
      "duration": {"type": "number", "minimum": 0},
      "turns": {"type": "array", "items": {
        "type": "object", "required": ["start", "end", "speaker", "text"],
        "properties": {
          "start": {"type": "number", "minimum": 0}, "end": {"type": "number", "minimum": 0},
          "speaker": {"enum": ["TEACHER", "STUDENT", "UNKNOWN"]},
          "text": {"type": "string", "minLength": 1},
          "words": {"type": "array", "items": {"type": "object", "required": ["token", "time"],
            "properties": {"token": {"type": "string"}, "time": {"type": "number"}}}}
        }}},
      "captions": {"type": "array", "minItems": 1, "items": {
        "type": "object", "required": ["start", "end", "segment_index", "caption"],
        "properties": {
          "start": {"type": "number"}, "end": {"type": "number"},
          "segment_index": {"type": "integer", "minimum": 0},
          "caption": {"type": "string", "minLength": 1}
        }}},
      "context_docs": {"type": "array", "items": {
        "type": "object", "required": ["kind", "title", "text"],
        "properties": {"kind": {"enum": ["LESSON_PLAN", "SLIDES", "NOTES", "OTHER"]},
                       "title": {"type": "string"}, "text": {"type": "string", "minLength": 1}}}}
    }
  },
  "artifact.hotspots.v1": {
    "type": "object",
    "required": ["schema_version", "lesson_id", "rubric_id", "inputs_fingerprint", "hotspots"],
    "properties": {
      "schema_version": {"enum": [1]},
      "hotspots": {"type": "array", "items": {
        "type": "object",
        "required": ["start", "end", "window_index", "dimension_id", "polarity", "context_summary", "trigger_excerpt"],
        "properties": {
          "start": {"type": "number"}, "end": {"type": "number"},
          "window_index": {"type": "integer", "minimum": 0},
          "dimension_id": {"type": "string", "minLength": 1},
          "polarity": {"enum": ["STRENGTH", "WEAKNESS"]},
          "context_summary": {"type": "string", "minLength": 1},
          "trigger_excerpt": {"type": "string"}
        }}}
    }
  },
  "artifact.feedback_item.v1": {
    "type": "object",
    "required": ["feedback_id", "hotspot_index", "dimension_id", "dimension_title", "start", "end",
                 "polarity", "guidelines", "content", "observed_behaviors", "actionable_advice"],
    "properties": {
      "feedback_id": {"type": "string", "minLength": 1},
      "hotspot_index": {"type": "integer", "minimum": 0},
      "dimension_id": {"type": "string", "minLength": 1},
      "dimension_title": {"type": "string", "minLength": 1},
      "start": {"type": "number"}, "end": {"type": "number"},
      "polarity": {"enum": ["STRENGTH", "WEAKNESS"]},
      "guidelines": {"type": "array", "minItems": 1, "items": {"type": "string", "minLength": 1}},
      "content": {"type": "string", "minLength": 1},
      "observed_behaviors": {"type": "string", "minLength": 1},
      "actionable_advice": {"type": "string", "minLength": 1},
      "validation": {"type": "object", "required": ["consistent", "rationale"],
                     "properties": {"consistent": {"type": "boolean"}, "rationale": {"type": "string"}}},
      "status": {"enum": ["VALIDATED", "REJECTED"]}
    }
  },
  "artifact.feedback_draft.v1": {
    "type": "object",
    "required": ["schema_version", "lesson_id", "rubric_id", "inputs_fingerprint", "items"],
    "properties": {"schema_version": {"enum": [1]}, "items": {"type": "array"}}
  },
  "artifact.feedback.v1": {
    "type": "object",
    "required": ["schema_version", "lesson_id", "rubric_id", "inputs_fingerprint", "generated_at", "items", "rejected"],
    "properties": {
      "schema_version": {"enum": [1]},
      "lesson_id": {"type": "string"}, "rubric_id": {"type": "string"},
      "generated_at": {"type": "string", "minLength": 1},
      "items": {"type": "array", "items": {"type": "object", "required": ["status", "validation"],
                                           "properties": {"status": {"enum": ["VALIDATED"]}}}},
      "rejected": {"type": "array", "items": {"type": "object", "required": ["status", "validation"],
                                              "properties": {"status": {"enum": ["REJECTED"]}}}}
    }
  },
  "artifact.annotations.v1": {
    "type": "object",
    "required": ["schema_version", "lesson_id", "taxonomy_id", "activities", "questions", "bloom_histogram", "outline"],
    "properties": {
      "schema_version": {"enum": [1]},
      "activities": {"type": "array", "items": {
        "type": "object", "required": ["start", "end", "actor", "labels"],
        "properties": {"start": {"type": "number"}, "end": {"type": "number"},
                       "actor": {"enum": ["TEACHER", "STUDENT"]},
                       "labels": {"type": "array", "minItems": 1, "items": {"type": "string"}}}}},
      "questions": {"type": "array", "items": {
        "type": "object", "required": ["text", "start", "end", "bloom_level", "bloom_name", "justification"],
        "properties": {"text": {"type": "string", "minLength": 1},
                       "start": {"type": "number"}, "end": {"type": "number"},
                       "bloom_level": {"type": "integer", "minimum": 1, "maximum": 6},
                       "bloom_name": {"type": "string"},
                       "justification": {"type": "string", "minLength": 1}}}},
      "bloom_histogram": {"type": "array", "minItems": 6, "maxItems": 6, "items": {
        "type": "object", "required": ["level", "name", "count"],
        "properties": {"level": {"type": "integer"}, "name": {"type": "string"},
                       "count": {"type": "integer", "minimum": 0}}}},
      "outline": {"type": "array", "minItems": 1, "items": {
        "type": "object", "required": ["start", "end", "heading", "summary"],
        "properties": {"heading": {"type": "string", "minLength": 1},
                       "summary": {"type": "string", "minLength": 1}}}}
    }
  },
  "artifact.recommendations.v1": {
    "type": "object", "required": ["schema_version", "lesson_id", "index_fingerprint", "recommendations"],
    "properties": {
      "schema_version": {"enum": [1]},
      "recommendations": {"type": "array", "items": {
        "type": "object", "required": ["feedback_id", "dimension_id", "query", "results"],
        "properties": {"query": {"type": "string", "minLength": 1},
                       "results": {"type": "array", "items": {
                         "type": "object", "required": ["clip_id", "title", "uri", "score", "explanation"],
                         "properties": {"score": {"type": "number"},
                                        "explanation": {"type": "string", "minLength": 1}}}}}}}
    }
  },
  "artifact.evaluation.v1": {
    "type": "object",
    "required": ["schema_version", "lesson_id", "item_count", "coverage", "grounding_rate",
                 "questions", "activities", "diarization"],
    "properties": {
      "schema_version": {"enum": [1]},
      "item_count": {"type": "integer", "minimum": 0},
      "coverage": {"type": ["object", "null"]},
      "grounding_rate": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
      "questions": {"type": ["object", "null"]},
      "activities": {"type": ["object", "null"]},
      "diarization": {"type": ["object", "null"]}
    }
  },

  "api.error.v1": {
    "type": "object", "required": ["error"],
    "properties": {"error": {"type": "object", "required": ["code", "message"],
                             "properties": {"code": {"type": "string"}, "message": {"type": "string"}}}}
  },
  "api.lesson_created.v1": {
    "type": "object", "required": ["lesson_id"],
    "properties": {"lesson_id": {"type": "string", "minLength": 1}}
  },
  "api.lesson.v1": {
    "type": "object", "required": ["lesson_id", "title", "duration", "created_at", "artifacts"],
    "properties": {
      "lesson_id": {"type": "string", "minLength": 1},
      "title": {"type": "string"},
      "duration": {"type": "number", "minimum": 0},
      "created_at": {"type": "string"},
      "media_url": {"type": "string"},
      "artifacts": {"type": "object"}
    }
  },
  "api.lessons.v1": {
    "type": "object", "required": ["lessons"],
    "properties": {"lessons": {"type": "array", "items": {"type": "object", "required": ["lesson_id", "title"]}}}
  },
  "api.job_created.v1": {
    "type": "object", "required": ["job_id"],
    "properties": {"job_id": {"type": "string", "minLength": 1}}
  },
  "api.job.v1": {
    "type": "object", "required": ["job_id", "lesson_id", "stage", "state", "error", "timings"],
    "properties": {
      "job_id": {"type": "string"}, "lesson_id": {"type": "string"},
      "stage": {"enum": ["INGEST", "ANALYZE", "ANNOTATE", "RECOMMEND", "EVALUATE"]},
      "state": {"enum": ["QUEUED", "RUNNING", "DONE", "FAILED"]},
      "error": {"type": ["object", "null"]},
      "timings": {"type": "object"}
    }
  }
})JSON";

}  // namespace classmind::detail
