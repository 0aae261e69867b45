/*
 * jotlog: collect note lines and echo the latest one at exit.
 *
 * Input is a note per line; the literal line "RESET" drops everything
 * collected so far. After the whole file is read, the most recent
 * surviving note is printed as the session summary.
 */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define MAX_NOTES 64

static char* notes[MAX_NOTES];
static int note_count;

static void add_note(const char* text)
{
	if (note_count >= MAX_NOTES) {
		fprintf(stderr, "jotlog: too many notes\n");
		return;
	}
	notes[note_count++] = strdup(text);
}

static void reset_notes(void)
{
	int i;

	for (i = 0; i < note_count; i++) {
		free(notes[i]);
	}
}

static void print_summary(void)
{
	if (note_count == 0) {
		printf("(no notes)\n");
		return;
	}
	printf("latest: %s\n", notes[note_count - 1]);
}

int main(int argc, char** argv)
{
	FILE* fp;
	char line[256];
	size_t n;

	if (argc != 2) {
		fprintf(stderr, "usage: jotlog <notes-file>\n");
		return 2;
	}
	fp = fopen(argv[1], "r");
	if (!fp) {
		perror(argv[1]);
		return 2;
	}
	while (fgets(line, sizeof(line), fp)) {
		n = strlen(line);
		if (n > 0 && line[n - 1] == '\n') {
			line[n - 1] = '\0';
		}
		if (strcmp(line, "RESET") == 0) {
			reset_notes();
		} else if (line[0] != '\0') {
			add_note(line);
		}
	}
	fclose(fp);
	print_summary();
	return 0;
}
