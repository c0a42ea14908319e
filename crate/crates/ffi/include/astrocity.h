#ifndef ASTROCITY_H
#define ASTROCITY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum AstrocityStatus {
  ASTROCITY_STATUS_OK = 0,
  ASTROCITY_STATUS_NULL_ARGUMENT = 1,
  ASTROCITY_STATUS_INVALID_UTF8 = 2,
  // Malformed JSON, grid or recipe text.
  ASTROCITY_STATUS_PARSE = 3,
  ASTROCITY_STATUS_IO = 4,
  // Unknown CRS or coordinates outside the projection domain.
  ASTROCITY_STATUS_DOMAIN = 5,
  // Input rejected by a precondition, builder or registry check.
  ASTROCITY_STATUS_INVALID = 6,
  // Upgrade requested on a document that is already current.
  ASTROCITY_STATUS_ALREADY_CURRENT = 7,
  // A panic was caught at the boundary.
  ASTROCITY_STATUS_INTERNAL = 8,
} AstrocityStatus;

// Opaque CityJSON document.
typedef struct AstrocityDocument AstrocityDocument;

// Opaque extension registry.
typedef struct AstrocityRegistry AstrocityRegistry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into the library on this thread.
const char *astrocity_last_error(void);

// Release a string returned by this library.
void astrocity_string_free(char *s);

// The built-in 3DSpace registry. Never NULL.
struct AstrocityRegistry *astrocity_registry_builtin(void);

// Load a registry from extension schema text.
enum AstrocityStatus astrocity_registry_from_schema(const char *schema_json,
                                                    struct AstrocityRegistry **out_registry);

void astrocity_registry_free(struct AstrocityRegistry *registry);

// Extension schema text for `registry`.
enum AstrocityStatus astrocity_registry_emit_schema(const struct AstrocityRegistry *registry,
                                                    char **out_json);

// Project planetocentric degrees to metres under a built-in CRS such as
// `"IAU_2015:30185"`.
enum AstrocityStatus astrocity_project_forward(const char *crs,
                                               double lat,
                                               double lon,
                                               double *out_x,
                                               double *out_y);

enum AstrocityStatus astrocity_project_inverse(const char *crs,
                                               double x,
                                               double y,
                                               double *out_lat,
                                               double *out_lon);

// Parse a CityJSON document. With `checked` false, structural problems are
// left for [`astrocity_validate`] to report.
enum AstrocityStatus astrocity_document_read(const char *json,
                                             bool checked,
                                             struct AstrocityDocument **out_document);

enum AstrocityStatus astrocity_document_write(const struct AstrocityDocument *document,
                                              char **out_json);

// Upgrade a 1.0 document to 2.0 in place. The document is unchanged on
// failure.
enum AstrocityStatus astrocity_document_upgrade(struct AstrocityDocument *document);

// Number of city objects, or 0 for NULL.
size_t astrocity_document_object_count(const struct AstrocityDocument *document);

void astrocity_document_free(struct AstrocityDocument *document);

// Validate `document`. `registry` may be NULL for core checks only.
// `out_report_json` may be NULL; otherwise it receives the issue list as a
// JSON array.
enum AstrocityStatus astrocity_validate(const struct AstrocityDocument *document,
                                        const struct AstrocityRegistry *registry,
                                        bool strict,
                                        size_t *out_error_count,
                                        char **out_report_json);

// Run the recipe at `path` with the built-in registry. `seed` may be NULL to
// use the recipe's own seed.
enum AstrocityStatus astrocity_build_recipe(const char *path,
                                            const uint64_t *seed,
                                            struct AstrocityDocument **out_document);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASTROCITY_H */
