/*
 * tagcat: print the tag of a record file.
 *
 * A record file starts with one "<tag>:<payload>" line. The tag is
 * duplicated into its own buffer so the payload can be edited in
 * place later without moving the tag out from under us.
 */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static char* dup_tag(const char* line, int tag_len)
{
	char* tag;

	tag = malloc(tag_len);
	if (!tag) {
		return 0;
	}
	memcpy(tag, line, tag_len);
	tag[tag_len] = '\0';
	return tag;
}

static int print_tag(const char* line)
{
	const char* colon;
	char* tag;

	colon = strchr(line, ':');
	if (!colon || colon == line) {
		fprintf(stderr, "tagcat: record has no tag\n");
		return 1;
	}
	tag = dup_tag(line, (int)(colon - line));
	if (!tag) {
		return 1;
	}
	printf("%s\n", tag);
	free(tag);
	return 0;
}

int main(int argc, char** argv)
{
	FILE* fp;
	char line[256];
	int rc;

	if (argc != 2) {
		fprintf(stderr, "usage: tagcat <record-file>\n");
		return 2;
	}
	fp = fopen(argv[1], "r");
	if (!fp) {
		perror(argv[1]);
		return 2;
	}
	if (!fgets(line, sizeof(line), fp)) {
		fclose(fp);
		fprintf(stderr, "tagcat: empty record\n");
		return 1;
	}
	rc = print_tag(line);
	fclose(fp);
	return rc;
}
