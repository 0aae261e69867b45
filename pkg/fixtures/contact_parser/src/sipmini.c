/*
 * sipmini: count the contacts in a header body dump.
 */

#include <stdio.h>
#include <stdlib.h>

#include "contact.h"

static char* read_input(const char* path, int* len_out)
{
	FILE* fp;
	char* buf;
	long size;

	fp = fopen(path, "rb");
	if (!fp) {
		perror(path);
		return 0;
	}
	fseek(fp, 0, SEEK_END);
	size = ftell(fp);
	fseek(fp, 0, SEEK_SET);
	if (size < 0) {
		fclose(fp);
		return 0;
	}
	buf = malloc(size > 0 ? (size_t)size : 1);
	if (!buf) {
		fclose(fp);
		return 0;
	}
	*len_out = (int)fread(buf, 1, (size_t)size, fp);
	fclose(fp);
	return buf;
}

int main(int argc, char** argv)
{
	char* buf;
	int len;
	int n;

	if (argc != 2) {
		fprintf(stderr, "usage: sipmini <header-file>\n");
		return 2;
	}
	len = 0;
	buf = read_input(argv[1], &len);
	if (!buf) {
		return 2;
	}
	n = parse_contacts(buf, len);
	free(buf);
	if (n < 0) {
		fprintf(stderr, "sipmini: too many contacts\n");
		return 1;
	}
	printf("contacts: %d\n", n);
	return 0;
}
