/*
 * Function entry/exit tracer.
 *
 * Link this file into a target built with -finstrument-functions and
 * every call in the instrumented translation units records an
 * `E <addr>` / `X <addr>` event. Events are flushed one by one so the
 * trace survives a sanitizer abort. Addresses are function entry
 * points; built with -no-pie they match the static symbol table, so
 * nm + addr2line recover names and source lines afterwards.
 *
 * The trace is written to trace.out in the working directory, or to
 * the path named by HOOKRT_OUT when set.
 */

#include <stdio.h>
#include <stdlib.h>

static FILE* trace_fp;

__attribute__((no_instrument_function))
static FILE* trace_file(void)
{
	const char* path;

	if (!trace_fp) {
		path = getenv("HOOKRT_OUT");
		trace_fp = fopen(path ? path : "trace.out", "w");
	}
	return trace_fp;
}

__attribute__((no_instrument_function))
void __cyg_profile_func_enter(void* fn, void* call_site)
{
	FILE* fp = trace_file();

	(void)call_site;
	if (fp) {
		fprintf(fp, "E %p\n", fn);
		fflush(fp);
	}
}

__attribute__((no_instrument_function))
void __cyg_profile_func_exit(void* fn, void* call_site)
{
	FILE* fp = trace_file();

	(void)call_site;
	if (fp) {
		fprintf(fp, "X %p\n", fn);
		fflush(fp);
	}
}
